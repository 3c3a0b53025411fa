"""Exhaustive threshold-mechanism search on the grid {0,1,2}."""
import sys

from truthlab.demo import run

if __name__ == "__main__":
    sys.exit(run("search"))
