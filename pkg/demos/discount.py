"""The discount mechanism: truthful, yet its welfare ratio grows with the grid."""
import sys

from truthlab.demo import run

if __name__ == "__main__":
    sys.exit(run("discount"))
