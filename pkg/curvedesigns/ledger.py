"""
CURVE-DESIGNS Run Ledger
SQLite record of verification outcomes
"""

import logging
import sqlite3
import time
from pathlib import Path
from typing import Dict, Iterable, List, Union

logger = logging.getLogger(__name__)

ROW_FIELDS = ('n', 'modulus', 'claim', 'status', 'detail')


class RunLedger:
    """Appends one row per checked claim to a `verification_runs` table"""

    def __init__(self, db_path: Union[str, Path]):
        self.db_path = str(db_path)
        self._init_database()

    def _init_database(self):
        conn = sqlite3.connect(self.db_path)
        conn.execute("""
            CREATE TABLE IF NOT EXISTS verification_runs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                recorded_at REAL,
                command TEXT,
                config_hash TEXT,
                n INTEGER,
                modulus TEXT,
                claim TEXT,
                status TEXT,
                detail TEXT
            )
        """)
        conn.commit()
        conn.close()

    def record(self, command: str, config_hash: str, rows: Iterable[Dict]) -> int:
        now = time.time()
        values = [
            (now, command, config_hash, int(row['n']), str(row['modulus']),
             str(row['claim']), str(row['status']), str(row.get('detail', '')))
            for row in rows
        ]
        conn = sqlite3.connect(self.db_path)
        with conn:
            conn.executemany("""
                INSERT INTO verification_runs
                (recorded_at, command, config_hash, n, modulus, claim, status, detail)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?)
            """, values)
        conn.close()
        logger.info(f"Recorded {len(values)} rows in {self.db_path}")
        return len(values)

    def recent_runs(self, limit: int = 100) -> List[Dict]:
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row
        cursor = conn.execute("""
            SELECT command, config_hash, n, modulus, claim, status, detail
            FROM verification_runs ORDER BY id DESC LIMIT ?
        """, (limit,))
        rows = [dict(r) for r in cursor.fetchall()]
        conn.close()
        return rows
