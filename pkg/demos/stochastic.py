"""Known arrival probability p=1/2: truthful and 2-approximate in expectation."""
import sys

from truthlab.demo import run

if __name__ == "__main__":
    sys.exit(run("stochastic"))
