"""Run every demo in turn."""
import sys

from truthlab.demo import DEMOS, run

if __name__ == "__main__":
    for name in DEMOS:
        print(f"== {name}")
        if run(name):
            sys.exit(1)
