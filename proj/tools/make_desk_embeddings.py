#!/usr/bin/env python3
"""Writes the desk embedding fixture: 50 words, 16 dimensions.

Each word vector is a sum of topic vectors plus a small word-specific
offset. All randomness comes from SHA-256 of fixed labels, so the output
is byte-identical on every run.
"""
import argparse
import hashlib
import struct

DIM = 16

TOPICS = {
    "companion": ["escort", "convoy", "minder", "chaperone", "guard"],
    "finance": ["banking", "finance", "trading", "lending", "money", "managing"],
    "speech": ["voice", "speak", "sound", "utter"],
    "bird": ["raven", "robin", "eagle", "bird"],
    "sight": ["blind", "shade", "seeing", "window", "covering"],
    "ruin": ["undermined", "demolished", "damaged"],
    "cut": ["pare", "trim", "clip", "shave"],
    "royal": ["regal", "royal", "noble", "king", "fit"],
    "inquiry": ["delve", "probe", "study", "research"],
    "optics": ["camera", "optics", "scopes", "optical", "device"],
    "offer": ["proposal", "overture", "offer"],
    "language": ["lisp", "language"],
}


def unit(label):
    """Deterministic vector in [-1, 1)^DIM from a label."""
    out = []
    counter = 0
    while len(out) < DIM:
        digest = hashlib.sha256(f"{label}#{counter}".encode()).digest()
        for (value,) in struct.iter_unpack(">I", digest):
            out.append(value / 2**31 - 1.0)
        counter += 1
    return out[:DIM]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output")
    parser.add_argument("--noise", type=float, default=0.35)
    args = parser.parse_args()

    rows = []
    for topic, words in TOPICS.items():
        base = unit("topic:" + topic)
        for word in words:
            offset = unit("word:" + word)
            rows.append((word, [b + args.noise * o for b, o in zip(base, offset)]))
    with open(args.output, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{len(rows)} {DIM}\n")
        for word, vec in rows:
            f.write(word + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")


if __name__ == "__main__":
    main()
