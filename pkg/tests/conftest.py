"""Shared builders for the worked-example catalog used across the tests.

Three sources cover an education schema unevenly: DS2 supplies every
table, DS3 has students and departments with some nulls and bad cells,
DS1 only departments. The expected per-column profiles below were
computed by hand from the fixture CSVs and are the oracle the
assessment tests check against.
"""

from __future__ import annotations

from datetime import date
from fractions import Fraction
from pathlib import Path

import pytest

from quint.assess import assess_catalog
from quint.catalog import Catalog

FIXTURES = Path(__file__).parent / "fixtures"

AS_OF = date(2016, 2, 2)
AGE_MODE = "months30"

Q1 = "SELECT SName, SAddress, DOB, SupName, DName FROM G"
Q2 = Q1 + " WITH fact completeness is high"
Q3 = "SELECT SName, SAddress, DOB, SupName FROM G"
Q6 = Q1 + " WITH fact completeness is high OR validity is high OR accuracy is high"
UNSAT = Q1 + " WITH fact_completeness >= 0.99 AND validity >= 0.99"

RELATIONS = [
    # source, relation, columns, insertion date, data file
    ("DS1", "Department", ["DId", "DName"], "2/12/2015", "ds1_department.csv"),
    ("DS2", "Student",
     ["StudentId", "StudentName", "StudentAddress", "GPA", "DOB"],
     "2/1/2016", "ds2_student.csv"),
    ("DS2", "Supervisor", ["SupId", "SupName"], "2/1/2016", "ds2_supervisor.csv"),
    ("DS2", "Department", ["DepartmentId", "DepartmentName"],
     "2/1/2016", "ds2_department.csv"),
    ("DS3", "Student", ["StudId", "StudName", "studAddress", "GPA", "DOB"],
     "2/10/2015", "ds3_student.csv"),
    ("DS3", "Department", ["DeptId", "DeptName"], "2/10/2015", "ds3_department.csv"),
]

REFERENCES = [
    ("Student", "ref_student.csv"),
    ("Supervisor", "ref_supervisor.csv"),
    ("Department", "ref_department.csv"),
]

# (source column id, global column id); ids follow registration order
MAPPINGS = [
    (3, 1), (12, 1), (4, 2), (13, 2), (5, 3), (14, 3), (6, 4), (15, 4),
    (7, 5), (16, 5), (8, 6), (9, 7), (1, 8), (10, 8), (17, 8),
    (2, 9), (11, 9), (18, 9),
]

# (column, gs column) -> (population, incompleteness, fact, validity,
# accuracy, timeliness), all at two decimals.
EXPECTED_PROFILES = {
    (3, 1): ("1.00", "0.00", "1.00", "1.00", "1.00", "0.92"),
    (12, 1): ("1.00", "0.00", "1.00", "1.00", "1.00", "0.67"),
    (4, 2): ("1.00", "0.25", "0.75", "0.75", "0.75", "0.92"),
    (13, 2): ("1.00", "0.00", "1.00", "1.00", "1.00", "0.67"),
    (5, 3): ("1.00", "0.00", "1.00", "1.00", "1.00", "0.92"),
    (14, 3): ("1.00", "0.25", "0.75", "0.75", "0.75", "0.67"),
    (6, 4): ("1.00", "0.00", "1.00", "1.00", "0.75", "0.92"),
    (15, 4): ("1.00", "0.00", "1.00", "1.00", "1.00", "0.67"),
    (7, 5): ("1.00", "0.00", "1.00", "1.00", "1.00", "0.92"),
    (16, 5): ("1.00", "0.00", "1.00", "1.00", "1.00", "0.67"),
    (8, 6): ("1.00", "0.00", "1.00", "1.00", "1.00", "0.92"),
    (9, 7): ("1.00", "0.00", "1.00", "1.00", "1.00", "0.92"),
    (1, 8): ("1.00", "0.00", "1.00", "1.00", "1.00", "0.84"),
    (10, 8): ("1.00", "0.00", "1.00", "1.00", "1.00", "0.92"),
    (17, 8): ("1.00", "0.00", "1.00", "1.00", "1.00", "0.67"),
    (2, 9): ("1.00", "0.00", "1.00", "0.67", "0.67", "0.84"),
    (11, 9): ("1.00", "0.00", "1.00", "1.00", "1.00", "0.92"),
    (18, 9): ("1.00", "0.33", "0.67", "0.33", "0.33", "0.67"),
}

EXPECTED_SOURCE_VECTORS = {
    "DS1": ("0.20", "0.13", "0.13", "0.84"),
    "DS2": ("0.95", "0.95", "0.95", "0.92"),
    "DS3": ("0.68", "0.62", "0.62", "0.67"),
}


def build_catalog() -> Catalog:
    cat = Catalog()
    cat.load_global_schema_file(FIXTURES / "global_schema.txt")
    cat.register_domain("education")
    for name in ("DS1", "DS2", "DS3"):
        cat.register_source(name, "education")
    for source_name, rel_name, columns, inserted, data in RELATIONS:
        source = cat.source_by_name(source_name)
        rel = cat.add_relation(source.source_id, rel_name, columns, inserted, 365)
        cat.load_relation(rel.relation_id, FIXTURES / data)
    for table_name, data in REFERENCES:
        table = cat.gs_table_by_name(table_name)
        cat.load_reference(table.gs_table_id, FIXTURES / data)
    for column_id, gs_column_id in MAPPINGS:
        cat.upsert_mapping(column_id, gs_column_id)
    return cat


def build_assessed() -> Catalog:
    cat = build_catalog()
    assess_catalog(cat, AS_OF, AGE_MODE)
    return cat


@pytest.fixture(scope="session")
def paper_catalog() -> Catalog:
    """One assessed catalog for read-only tests; do not mutate it."""
    return build_assessed()


def frac(text: str) -> Fraction:
    return Fraction(text)


@pytest.fixture
def report(capsys):
    """Print an acceptance verdict line to the real terminal, then assert."""

    def _report(number: int, ok: bool, detail: str = ""):
        suffix = f" ({detail})" if detail and not ok else ""
        with capsys.disabled():
            print(f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'}{suffix}")
        assert ok, f"criterion {number} failed: {detail}"

    return _report
