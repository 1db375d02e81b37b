"""Reference values computed once with mpmath at 30 digits and frozen here."""

from __future__ import annotations

# Frozen with mpmath (30 digits): gamma, E_{1/2}(1) = e erfc(-1), and
# high-precision sums of the Mittag-Leffler series.
GAMMA_REF = {0.5: 1.7724538509055160273, 1.5: 0.88622692545275801365, 5.0: 24.0, 1.0: 1.0}
ML_REF = {
    (0.5, 1.0): 5.0089800807622834663,
    (0.5, -2.0): 0.25539567631050574387,
    (0.7, 3.0): 174.19304297541545683,
    (0.3, 0.5): 2.0620157899559994895,
    (0.9, 10.0): 451737.77456773740187,
}

# Adaptive quadrature (mpmath, tanh-sinh, 30 digits) of the Caputo integral
# (1/Gamma(1-a)) int_0^t (t-s)^(-a) d/ds s^sigma ds, after substitutions that
# remove both endpoint singularities.
CAPUTO_REF = {
    (0.1, 0.3, 1.0): 0.97745725253139611, (0.1, 0.3, 0.7): 0.9101592377034428,
    (0.1, 0.5, 1.0): 0.99883135992941166, (0.1, 0.5, 0.7): 0.86602690650221813,
    (0.1, 1.0, 1.0): 1.0397541343476364, (0.1, 1.0, 0.7): 0.75425620548253531,
    (0.1, 1.5, 1.0): 1.0701764570672268, (0.1, 1.5, 0.7): 0.64952017987666356,
    (0.3, 0.3, 1.0): 0.89747069630627719, (0.3, 0.3, 0.7): 0.89747069630627719,
    (0.3, 0.5, 1.0): 0.96521138711004444, (0.3, 0.5, 0.7): 0.89875650115608838,
    (0.3, 1.0, 1.0): 1.1005474055236657, (0.3, 1.0, 0.7): 0.8573879634473342,
    (0.3, 1.5, 1.0): 1.2065142338875555, (0.3, 1.5, 0.7): 0.78641193851157728,
    (0.5, 0.3, 1.0): 0.7708708047268005, (0.5, 0.3, 0.7): 0.82786970414778727,
    (0.5, 0.5, 1.0): 0.88622692545275801, (0.5, 0.5, 0.7): 0.88622692545275801,
    (0.5, 1.0, 1.0): 1.1283791670955126, (0.5, 1.0, 0.7): 0.94406974388262959,
    (0.5, 1.5, 1.0): 1.329340388179137, (0.5, 1.5, 0.7): 0.93053827172539586,
    (0.7, 0.3, 1.0): 0.60265603519071508, (0.7, 0.3, 0.7): 0.69507280048656034,
    (0.7, 0.5, 1.0): 0.76121311370503358, (0.7, 0.5, 0.7): 0.81749791453023326,
    (0.7, 1.0, 1.0): 1.1142425085473019, (0.7, 1.0, 0.7): 1.001173013769358,
    (0.7, 1.5, 1.0): 1.4272745881969379, (0.7, 1.5, 0.7): 1.072966012820931,
    (0.9, 0.3, 1.0): 0.40460150796272787, (0.9, 0.3, 0.7): 0.50115108281836288,
    (0.9, 0.5, 1.0): 0.59510578715357765, (0.9, 0.5, 0.7): 0.68636472864939621,
    (0.9, 1.0, 1.0): 1.0511370061117778, (0.9, 1.0, 0.7): 1.0143063165385875,
    (0.9, 1.5, 1.0): 1.4877644678839442, (0.9, 1.5, 0.7): 1.2011382751364433,
    (0.99, 0.3, 1.0): 0.31050738721561813, (0.99, 0.3, 0.7): 0.39714974609563476,
    (0.99, 0.5, 1.0): 0.50979017700063142, (0.99, 0.5, 0.7): 0.60714639866842376,
    (0.99, 1.0, 1.0): 1.0057065285003851, (0.99, 1.0, 0.7): 1.0021258148539271,
    (0.99, 1.5, 1.0): 1.4993828735312689, (0.99, 1.5, 0.7): 1.2500072913761665,
}

# mpmath quadrature (30 digits) of the a- and b-integrals, assembled into
# A^(n)_0..A^(n)_{n-1} on graded_mesh(1, 4, 2) with alpha = 0.6
ALIK_GRADED4 = [
    [5.1577279870526707],
    [2.6723654689350602, 1.3361827344675555],
    [1.9764198452039964, 0.89925586833066081, 0.7382776973035796],
    [1.6198542658299594, 0.71198145869946086, 0.54886811930342577, 0.50061266423195482],
]
