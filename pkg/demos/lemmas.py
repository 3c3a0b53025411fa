"""The threshold lemma suite on the pi1=2, pi2=5 fixture and its three corruptions."""
import sys

from truthlab.demo import run

if __name__ == "__main__":
    sys.exit(run("lemmas"))
