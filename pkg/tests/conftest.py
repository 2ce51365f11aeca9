import sys

import pytest

from afc_raman.analytic import ProtocolParams
from afc_raman.comb import CombParams
from afc_raman.link import get_preset


def wide_comb(finesse, alpha_L=10.0, gamma_fwhm=1e4, envelope_ratio=20.0):
    """Comb deep in the Gamma >> delta0 >> gamma regime."""
    delta0 = finesse * gamma_fwhm
    return CombParams(gamma_fwhm=gamma_fwhm, delta0=delta0,
                      big_gamma=envelope_ratio * delta0, alpha_L=alpha_L)


@pytest.fixture
def pr_comb():
    return get_preset("pr_yso_606nm").comb()


@pytest.fixture
def pr_protocol():
    return ProtocolParams(theta0_sq=0.1)


@pytest.fixture
def wide():
    return wide_comb


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    if acc is None or not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in acc.CRITERIA:
        if name in acc.RESULTS:
            terminalreporter.write_line(acc.line(name))
