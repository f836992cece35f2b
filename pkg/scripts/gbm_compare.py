"""Powered adjacency against classical methods and the known-location classifier on GBM.

    python scripts/gbm_compare.py --trials 10
"""
from _runner import main

if __name__ == "__main__":
    main("gbm_compare.json", __doc__)
