"""Build crates/core/data/sample.txt from public-domain Project Gutenberg plays.

Source: the `shakespeare` package on PyPI (shksprdata/texts/*_gut.txt).
Output: one sentence per line, lowercased, punctuation split off as tokens.

    pip download --no-deps shakespeare && tar xzf shakespeare-*.tar.gz
    python scripts/prepare_sample.py shakespeare-0.6/shksprdata/texts > crates/core/data/sample.txt
"""
import re
import sys
from pathlib import Path

PLAYS = [
    "hamlet", "macbeth", "othello", "lear", "julius_caesar",
]
TARGET_TOKENS = 100_000

SPEAKER = re.compile(r"^[A-Z][A-Za-z ]{0,24}\.$")
HEADING = re.compile(r"^(ACT [IVX]+\.?|Scene [IVX]+\..*|SCENE\..*|ACT [IVX]+\. SCENE.*)$", re.I)
TOKEN = re.compile(r"[a-z]+(?:'[a-z]+)*|[,;:!?.]")
SENTENCE_END = {".", "!", "?"}


def play_lines(path):
    text = path.read_text(encoding="utf-8", errors="replace")
    # drop the dramatis personae: keep everything from the first ACT heading
    start = re.search(r"^ACT I\b", text, re.M)
    if start:
        text = text[start.start():]
    text = re.sub(r"\[[^\]]*\]", " ", text)
    for raw in text.splitlines():
        line = raw.strip()
        if not line or SPEAKER.match(line) or HEADING.match(line):
            continue
        yield line


def sentences(lines):
    current = []
    for line in lines:
        for tok in TOKEN.findall(line.lower().replace("’", "'")):
            current.append(tok)
            if tok in SENTENCE_END:
                if len(current) > 1:
                    yield current
                current = []
    if len(current) > 1:
        yield current


def main():
    root = Path(sys.argv[1])
    total = 0
    for play in PLAYS:
        for sent in sentences(play_lines(root / f"{play}_gut.txt")):
            print(" ".join(sent))
            total += len(sent)
            if total >= TARGET_TOKENS:
                return


if __name__ == "__main__":
    main()
