"""Agreement of five spectral methods on the hybrid block model benchmark instance.

    python scripts/table1_hbm.py --trials 10
"""
from _runner import main

if __name__ == "__main__":
    main("table1_hbm.json", __doc__)
