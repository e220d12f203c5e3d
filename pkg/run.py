# -*- coding: utf-8 -*-
"""
Ponto de entrada das simulações.

Exemplos:
    python run.py simulate --ntx 4 --k 2 --eps 0.1 --snr 0,5,10 --trials 50 --out results/sweep.csv
    python run.py selftest
"""

from experiments.cli import main

if __name__ == "__main__":
    main()
