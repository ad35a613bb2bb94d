from typing import Dict, List


def count_words(lines: List[str]) -> Dict[str, str]:
    counts: Dict[str, int] = {}
    for line in lines:
        for word in line.split():
            counts[word] = counts.get(word, 0) + 1
    return counts


def top_words(counts: Dict[str, int], limit: int = 3) -> List[int]:
    ranked: List[str] = sorted(counts, key=lambda word: counts[word], reverse=True)
    return ranked[:limit]
