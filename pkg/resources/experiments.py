# Experiment settings, one row per experiment:
# servers, lambda_1, lambda_2, mu_1, mu_2, beta, p, alternation period, horizon
EXPERIMENTS_TABLE = {
    1:  (50,  40,  80,  1, 0.2, 2.0, 0.5, 2, 20),
    2:  (50,  40,  60,  1, 0.2, 2.0, 0.5, 2, 20),
    3:  (100, 80,  120, 1, 0.2, 2.0, 0.7, 2, 20),
    4:  (100, 90,  110, 1, 0.2, 2.0, 0.7, 2, 20),
    5:  (50,  40,  80,  1, 0.2, 1.5, 0.7, 2, 20),
    6:  (50,  40,  60,  1, 0.2, 1.5, 0.7, 2, 20),
    7:  (50,  45,  55,  1, 0.2, 2.0, 0.5, 2, 20),
    8:  (100, 95,  105, 1, 0.2, 2.0, 0.5, 2, 20),
    9:  (150, 140, 160, 1, 0.2, 2.0, 0.5, 2, 20),
    10: (150, 100, 190, 1, 0.2, 2.0, 0.5, 2, 20),
}

# experiments whose fluid lingers around the critically loaded point x1 = n
LINGERING_EXPERIMENTS = (2, 4, 6, 7, 8, 9)

TABLE_METHOD_LABELS = {
    "adjusted": "proposed",
    "classic": "meas. 0",
}
