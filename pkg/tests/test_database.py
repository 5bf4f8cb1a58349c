import os
import tempfile
import typing as tp
from pathlib import Path as p

import numpy as np
import pytest

from burgulence.data import Sample, TrajectoryStream
from burgulence.db import RunDB

RUN = "scaling/viscous/nu=0.01/N=1024"


@pytest.fixture
def setup_database() -> tp.Generator[None, None, None]:
    """ Fixture to set up RunDB in temporary Directory"""
    with tempfile.TemporaryDirectory() as newpath:
        old_cwd = os.getcwd()
        os.chdir(newpath)
        dbname = p.cwd() / ".dbtest.sqlite"
        stream = TrajectoryStream(("sobolev:1", "spectrum"), member=2)
        for t in (0.0, 0.5, 1.0):
            stream.append(t, {"sobolev:1": np.array(t + 1.0), "spectrum": np.array([t, 2 * t, 3 * t])})

        with RunDB(dbname) as db:
            db.samples_insert(RUN, stream.samples())
            db.set_member(RUN, 2, completed=False)
            db.commit()

        yield

        os.chdir(old_cwd)


@pytest.mark.usefixtures("setup_database")
class TestDatabase:
    dbname = p(".dbtest.sqlite")

    def test_insert_get(self) -> None:
        """check data inserted in fixture 'setup_database' works."""
        with RunDB(self.dbname) as db:
            samples = list(db.get_samples(RUN, 2))
        assert len(samples) == 6
        assert [s.t for s in samples[:2]] == [0.0, 0.0]
        stream = TrajectoryStream.from_samples(("sobolev:1", "spectrum"), 2, samples)
        assert stream.times == [0.0, 0.5, 1.0]
        assert np.array_equal(stream.series("spectrum")[-1], [1.0, 2.0, 3.0])
        assert stream.series("sobolev:1").shape == (3,)

    def test_other_member_is_empty(self) -> None:
        with RunDB(self.dbname) as db:
            assert list(db.get_samples(RUN, 0)) == []
            assert list(db.get_samples("other", 2)) == []

    def test_replace(self) -> None:
        with RunDB(self.dbname) as db:
            db.samples_insert(RUN, [Sample(2, 0.5, "sobolev:1", np.array(9.0))])
            db.commit()
        with RunDB(self.dbname) as db:
            values = {(s.t, s.probe): s.value for s in db.get_samples(RUN, 2)}
        assert len(values) == 6
        assert values[(0.5, "sobolev:1")] == 9.0

    def test_delete_after(self) -> None:
        with RunDB(self.dbname) as db:
            db.delete_samples_after(RUN, 2, 0.5)
            db.commit()
        with RunDB(self.dbname) as db:
            assert sorted({s.t for s in db.get_samples(RUN, 2)}) == [0.0, 0.5]

    def test_rollback_by_default(self) -> None:
        with RunDB(self.dbname) as db:
            db.delete_run(RUN)
        with RunDB(self.dbname) as db:
            assert len(list(db.get_samples(RUN, 2))) == 6

    def test_members(self) -> None:
        with RunDB(self.dbname) as db:
            assert db.completed_members(RUN) == set()
            db.set_member(RUN, 2, completed=True)
            db.set_member(RUN, 3, completed=True)
            db.commit()
        with RunDB(self.dbname) as db:
            assert db.completed_members(RUN) == {2, 3}
            db.delete_run(RUN)
            db.commit()
        with RunDB(self.dbname) as db:
            assert db.completed_members(RUN) == set()
            assert list(db.get_samples(RUN, 2)) == []

    def test_sections(self) -> None:
        with RunDB(self.dbname) as db:
            db.section_put("spectrum", {'name': "spectrum", 'laws': []})
            db.section_put("scaling", {'name': "scaling", 'laws': []})
            db.section_put("spectrum", {'name': "spectrum", 'laws': [], 'summary': {'M': 2.0}})
            db.commit()
        with RunDB(self.dbname) as db:
            sections = db.get_sections()
        assert [name for name, _ in sections] == ["scaling", "spectrum"]
        assert sections[1][1]['summary'] == {'M': 2.0}
