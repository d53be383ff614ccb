# Repository root on sys.path so tests import `modules` and `abpce` directly


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size benchmark reproductions (minutes each)")
