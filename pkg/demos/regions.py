"""Map of the bundles bidder V receives facing pi1=2, pi2=5."""
import sys

from truthlab.demo import run

if __name__ == "__main__":
    sys.exit(run("regions"))
