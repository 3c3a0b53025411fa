"""The constancy probe along the segment 0 < w1 < 1/8, w2 = 8 at H=4."""
import sys

from truthlab.demo import run

if __name__ == "__main__":
    sys.exit(run("probe"))
