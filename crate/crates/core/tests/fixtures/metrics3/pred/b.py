from typing import Dict, List

TOTAL: int = 0


def g(items: List[int]) -> Dict[str, int]:
    return {str(i): i for i in items}
