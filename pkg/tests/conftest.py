import pytest

from helpers import table1_db, table1_item_scheme, table1_trans_scheme


@pytest.fixture(scope="session")
def db1():
    return table1_db()


@pytest.fixture(scope="session")
def items3(db1):
    return table1_item_scheme()


@pytest.fixture(scope="session")
def trans3(db1):
    return table1_trans_scheme()
