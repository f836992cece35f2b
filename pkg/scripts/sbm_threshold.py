"""Agreement on SBM(4000, a, b) with SNR held at 1.1, just above the KS threshold.

    python scripts/sbm_threshold.py --trials 3
"""
from _runner import main

if __name__ == "__main__":
    main("sbm_threshold.json", __doc__)
