"""Greedy allocation: half the optimum, but no payment rule makes it truthful."""
import sys

from truthlab.demo import run

if __name__ == "__main__":
    sys.exit(run("greedy"))
