"""Published reference values, keyed by ``two_s``, printed to four significant digits.

Amplitudes are magnitudes; their signs depend on the Clebsch-Gordan phase
convention and are not compared.
"""

SPINS = (1, 2, 3, 4, 5)

TABLE1 = {
    1: {"a": (0.973, 0.230), "energy": -0.8090, "e12": -0.1118, "e23": -0.6972, "e0": -1.0},
    2: {"a": (0.858, 0.506, 0.0839), "energy": -2.481, "e12": -0.7583, "e23": -1.722, "e0": -3.0},
    3: {"a": (0.749, 0.631, 0.198, 0.0269), "energy": -5.162, "e12": -1.933, "e23": -3.230, "e0": -6.0},
    4: {"a": (0.671, 0.676, 0.298, 0.0696, 0.00819), "energy": -8.849, "e12": -3.601, "e23": -5.248,
        "e0": -10.0},
    5: {"a": (0.612, 0.687, 0.373, 0.120, 0.0232, 0.00244), "energy": -13.54, "e12": -5.768,
        "e23": -7.771, "e0": -15.0},
}

# ``a`` of the s = 5/2 row lists a_5 < 1e-4; stored as None
TABLE2 = {
    1: {"a": (1.0, 0.0), "e22": -1.500, "e13": -1.190,
        "ebs": {5: -1.780, 6: -2.366, 7: -2.697, 8: -3.244}},
    2: {"a": (0.921, 0.387, 0.0418), "e22": -4.051, "e13": -3.828,
        "ebs": {5: -5.343, 6: -6.771, 7: -8.133, 8: -9.537}},
    3: {"a": (0.775, 0.607, 0.171, 0.0281), "e22": -8.131, "e13": -7.957,
        "ebs": {5: -10.90, 6: -13.75, 7: -16.56, 8: -19.39}},
    4: {"a": (0.687, 0.669, 0.278, 0.0602, 0.00649), "e22": -13.74, "e13": -13.59,
        "ebs": {5: -18.46, 6: -23.24, 7: -27.99, 8: -32.75}},
    5: {"a": (0.627, 0.669, 0.359, 0.134, 0.110, None), "e22": -21.18, "e13": -20.71,
        "ebs": {5: -28.03, 6: -35.23, 7: -42.42, 8: -49.62}},
}

# Entries whose printed amplitudes break the smooth decay of every other row.
AMPLITUDE_ANOMALIES = {("table2", 5, 4), ("table2", 5, 5)}

ENERGY_RTOL = 5e-4
