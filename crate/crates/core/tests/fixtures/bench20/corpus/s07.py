def lookup(d, key):
    return d.get(key, 0)
