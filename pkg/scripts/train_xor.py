#!/usr/bin/env python3
"""Train the XOR reference network and print the packed notation.

Usage: python3 scripts/train_xor.py [seed]
"""

import sys

sys.path.insert(0, "src")

from hivemind.ann import encode_network, evaluate
from hivemind.training import TrainConfig, train

DATASET = [([0, 0], [0]), ([0, 1], [1]), ([1, 0], [1]), ([1, 1], [0])]


def main():
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 42
    result = train(TrainConfig(topology=(2, 2, 1), seed=seed), DATASET)
    print(f"seed={seed} epochs={result.epochs} "
          f"final_error={result.final_error:.6f} converged={result.converged}")
    for x, t in DATASET:
        out = evaluate(result.network, x)[0]
        print(f"  {x} -> {out:.4f} (target {t[0]})")
    print(encode_network(result.network).decode("ascii"))


if __name__ == "__main__":
    main()
