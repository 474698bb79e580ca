"""Published channel-strength ranges for the two family states (theta = 0.6).

Keys are ``(mode, channel, lambda)``; values are the ``(R1, R2, R3)`` ranges
for CHSH locality, absolute CHSH locality and absolute 3-setting
unsteerability. ``None`` marks a cell printed as "--" (no range).
Endpoints are kept exactly as printed, including the ones known not to
reproduce.
"""

THETA = 0.6
LAMBDAS = (0.95, 0.8)
TABLE_CHANNELS = ("phase-flip", "bit-flip", "depolarizing", "phase-damping")
MODES = ("single", "double")

PUBLISHED_RANGES = {
    ("single", "phase-flip", 0.95): ((0.1492, 0.8508), (0.2252, 0.7747), None),
    ("single", "phase-flip", 0.8): ((0.0258, 0.9742), (0.0675, 0.9325), (0.1743, 0.8257)),
    ("single", "bit-flip", 0.95): ((0.2445, 0.7342), (0.3532, 0.6443), (0.3807, 0.6193)),
    ("single", "bit-flip", 0.8): ((0.0531, 0.9468), (0.1250, 0.8750), (0.2, 0.8)),
    ("single", "depolarizing", 0.95): ((0.0685, 1.0), (0.1928, 1.0), (0.2893, 1.0)),
    ("single", "depolarizing", 0.8): ((0.0692, 1.0), (0.1928, 1.0), (0.2893, 1.0)),
    ("single", "phase-damping", 0.95): ((0.3723, 1.0), (0.7846, 1.0), None),
    ("single", "phase-damping", 0.8): ((0.0516, 1.0), (0.1350, 1.0), (0.3485, 1.0)),
    ("double", "phase-flip", 0.95): ((0.1492, 0.8508), (0.2252, 0.7747), None),
    ("double", "phase-flip", 0.8): ((0.0131, 0.9869), (0.3050, 0.9650), (0.0964, 0.9036)),
    ("double", "bit-flip", 0.95): ((0.1378, 0.8622), (0.1856, 0.8144), (0.2256, 0.7744)),
    ("double", "bit-flip", 0.8): ((0.0273, 0.9727), (0.0654, 0.9345), (0.1093, 0.8907)),
    ("double", "depolarizing", 0.95): ((0.0354, 1.0), (0.0727, 1.0), (0.1560, 1.0)),
    ("double", "depolarizing", 0.8): ((0.0196, 1.0), (0.0481, 1.0), (0.0922, 1.0)),
    ("double", "phase-damping", 0.95): ((0.2077, 1.0), (0.5359, 1.0), None),
    ("double", "phase-damping", 0.8): ((0.0261, 1.0), (0.0699, 1.0), (0.1928, 1.0)),
}

# Mixture-state parameters and the strengths at which the noisy state reaches rho_f.
LHS_SCENARIOS = {
    "phase-damping": {"q": 0.96, "s": 0.74, "single": 0.65, "double": 0.41},
    "depolarizing": {"q": 0.34, "s": 0.97, "single": 0.18, "double": 0.10},
}
