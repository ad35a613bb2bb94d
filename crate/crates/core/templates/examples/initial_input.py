def count_words(lines):
    counts = {}
    for line in lines:
        for word in line.split():
            counts[word] = counts.get(word, 0) + 1
    return counts


def top_words(counts, limit=3):
    ranked = sorted(counts, key=lambda word: counts[word], reverse=True)
    return ranked[:limit]
