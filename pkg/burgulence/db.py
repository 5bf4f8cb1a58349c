import json
import sqlite3
import typing as tp
import types as ty
from pathlib import Path as p

from burgulence.data import Sample, from_row, to_row


class RunDB(object):
    """
    sqlite3 run store for burgulence.
    use as a context manager:
        with RunDB(dbname) as db:
            db.samples_insert(run, samples)
            db.commit()

    RunDB opens an implicit transaction and rolls back on exit.
    Every change needs to be explicitly committed!
    """

    def __init__(self, dbname: p) -> None:
        self._dbname = str(dbname)
        self.connection = sqlite3.connect(self._dbname, timeout=60.0)
        self.connection.row_factory = sqlite3.Row
        self.cur = self.connection.cursor()
        self.execute("""
                     CREATE TABLE IF NOT EXISTS samples (
                     run TEXT,
                     member INTEGER,
                     t REAL,
                     probe TEXT,
                     dtype TEXT,
                     shape TEXT,
                     value BLOB,
                     PRIMARY KEY (run, member, t, probe))""")
        self.execute("""
                     CREATE TABLE IF NOT EXISTS members (
                     run TEXT,
                     member INTEGER,
                     completed INTEGER,
                     PRIMARY KEY (run, member))""")
        self.execute("""
                     CREATE TABLE IF NOT EXISTS sections (
                     name TEXT PRIMARY KEY,
                     payload TEXT)""")
        self.commit()

    def __enter__(self) -> 'RunDB':
        return self

    def __exit__(self, ext_type: tp.Optional[tp.Type[BaseException]], exc_value: tp.Optional[BaseException], traceback: tp.Optional[ty.TracebackType]) -> tp.Optional[bool]:
        self.cur.close()
        self.connection.rollback()  # rollback by default!
        self.connection.close()
        return None

    def samples_insert(self, run: str, samples: tp.Iterable[Sample]) -> sqlite3.Cursor:
        insert_sql = "REPLACE INTO samples (run, member, t, probe, dtype, shape, value) VALUES (?,?,?,?,?,?,?)"
        return self.cur.executemany(insert_sql, [to_row(run, s) for s in samples])

    def get_samples(self, run: str, member: int) -> tp.Iterator[Sample]:
        get_sql = "SELECT * FROM samples WHERE run = ? AND member = ? ORDER BY t, probe"
        for row in self.cur.execute(get_sql, (run, member)).fetchall():
            yield from_row(row)

    def delete_samples_after(self, run: str, member: int, t: float) -> sqlite3.Cursor:
        delete_sql = "DELETE FROM samples WHERE run = ? AND member = ? AND t > ?"
        return self.cur.execute(delete_sql, (run, member, t))

    def set_member(self, run: str, member: int, completed: bool) -> sqlite3.Cursor:
        update_sql = "REPLACE INTO members (run, member, completed) VALUES (?,?,?)"
        return self.cur.execute(update_sql, (run, member, int(completed)))

    def completed_members(self, run: str) -> tp.Set[int]:
        get_sql = "SELECT member FROM members WHERE run = ? AND completed = 1"
        return {row['member'] for row in self.cur.execute(get_sql, (run,))}

    def delete_run(self, run: str) -> None:
        self.cur.execute("DELETE FROM samples WHERE run = ?", (run,))
        self.cur.execute("DELETE FROM members WHERE run = ?", (run,))

    def section_put(self, name: str, payload: tp.Mapping[str, tp.Any]) -> sqlite3.Cursor:
        insert_sql = "REPLACE INTO sections (name, payload) VALUES (?,?)"
        return self.cur.execute(insert_sql, (name, json.dumps(payload)))

    def get_sections(self) -> tp.List[tuple[str, tp.Dict[str, tp.Any]]]:
        get_sql = "SELECT name, payload FROM sections ORDER BY rowid"
        return [(row['name'], json.loads(row['payload'])) for row in self.cur.execute(get_sql)]

    def execute(self, sql: str) -> sqlite3.Cursor:
        return self.cur.execute(sql)

    def commit(self) -> None:
        self.connection.commit()

    def close(self) -> None:
        self.connection.close()
