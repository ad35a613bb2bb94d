import os
from typing import List


def add(a, b):
    return a + b


def greet(name):
    return "hello, " + name


def total(xs):
    acc = 0
    for x in xs:
        acc += x
    return acc


def pick(d, key, default=None):
    if key in d:
        return d[key]
    return default


def pairs(xs):
    return [(i, x) for i, x in enumerate(xs)]


def read(path):
    with open(path) as fh:
        return fh.read()


def env(name):
    return os.environ.get(name, "")


def longest(words: List[str]):
    best = ""
    for w in words:
        if len(w) > len(best):
            best = w
    return best


def safe_div(a, b):
    try:
        return a / b
    except ZeroDivisionError:
        return None


def outer(n):
    def inner(m):
        return m * 2

    return [inner(i) for i in range(n)] \
        + [n]
