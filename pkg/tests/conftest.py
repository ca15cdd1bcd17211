import pytest

from hadss_lab import build_grid, integrate_warp

# Independent high-precision values (mpmath findroot / Taylor ODE solver,
# scipy quad for the graph area); frozen here so the tests never recompute
# them with package code.
ROOT_ORACLE = {0.1: 0.19282993096291295358, 1.5: 1.2134116627622296341,
               100.0: 5.7910381007424863376}
WARP_ORACLE = {
    (1.0, 0.5): (1.2461352544003021539, 0.97359686509771050768),
    (1.0, 1.0): (1.9755887284863129975, 1.9724589653493180469),
    (1.0, 1.7): (4.0192579803402427227, 4.0812780383013487408),
    (2.0, 0.5): (2.4052610766154496174, 1.6210268396934098758),
    (2.0, 1.0): (3.6441125318343264747, 3.3963809836151482651),
    (2.0, 1.7): (7.2152603459612319741, 7.1884650993553322271),
}
# first eigenvalue of -Laplace on the unit hemisphere with d_nu f = beta f
ROBIN_ORACLE = {-0.5: 0.41603104944479558252, 0.3: -0.33788321848267047684}
# area of the graph s = 0.2 + 0.05 P_2(cos theta) over the a = 1 horizon
PERTURBED_AREA = 6.810597471636224


@pytest.fixture(scope="session")
def profiles():
    return {a: integrate_warp(a) for a in (1.0, 1.5, 2.0)}


@pytest.fixture(scope="session")
def grid():
    return build_grid(64, 128)


@pytest.fixture(scope="session")
def coarse_grid():
    return build_grid(32, 64)
