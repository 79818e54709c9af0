import pytest

import oracle

# The running example used throughout the suite: an 11-row sales table with
# four text dimensions and two numeric measures written in the "100$" style
# the ingester is expected to clean.
TABLE1_CSV = """\
location,time,salesman,product,cost,profit
Montreal,March,John,shoe,100$,10 $
Montreal,December,Smith,shoe,150$,30 $
Quebec,December,Smith,dress,175$,45 $
Ontario,April,Kate,dress,90$,10 $
Paris,March,John,shoe,100$,20 $
Paris,March,Marc,table,120$,10 $
Paris,June,Martin,shoe,120$,5 $
Lyon,April,Claude,dress,90$,10 $
NewYork,October,Joe,chair,100$,10 $
NewYork,May,Joe,chair,90$,10 $
Detroit,April,Jim,dress,90$,10 $
"""

TABLE1_DIMS = ["location", "time", "salesman", "product"]
TABLE1_MEASURES = ["cost", "profit"]


@pytest.fixture(scope="session")
def table1_csv():
    return TABLE1_CSV


@pytest.fixture(scope="session")
def table1_rows():
    columns, rows = oracle.parse_csv(TABLE1_CSV)
    return oracle.rows_as_dicts(columns, rows)


@pytest.fixture(scope="session")
def table1():
    from tagcube import fact_store

    return fact_store.parse_table(TABLE1_CSV.encode(), ",", True)


@pytest.fixture(scope="session")
def table1_ds(table1):
    from tagcube import fact_store

    return fact_store.bind_schema(table1, TABLE1_DIMS, TABLE1_MEASURES, name="table1")
