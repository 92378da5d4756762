import logging
import threading
from typing import Iterable, List, Optional

from sqlalchemy.orm import sessionmaker

from app.core.database import Base, SessionLocal, session_scope
from app.models.change_record import ChangeRecordRow
from app.schemas.corpus import ChangeRecord
from app.services.corpus_service import RECORD_FIELDS, record_id

logger = logging.getLogger(__name__)


class StoreService:
    def __init__(self, session_factory: sessionmaker = SessionLocal):
        self.session_factory = session_factory
        self._write_lock = threading.Lock()

    def create_tables(self) -> None:
        Base.metadata.create_all(bind=self.session_factory.kw["bind"])

    def save_records(self, records: Iterable[ChangeRecord]) -> int:
        """Insert records whose id is not stored yet; returns the number inserted"""
        inserted = 0
        with self._write_lock, session_scope(self.session_factory) as db:
            pending = set()
            for record in records:
                rid = record.id or record_id(record)
                if rid in pending or db.get(ChangeRecordRow, rid) is not None:
                    continue
                values = record.model_dump()
                values["id"] = rid
                db.add(ChangeRecordRow(**{k: values[k] or "" for k in RECORD_FIELDS}))
                pending.add(rid)
                inserted += 1
        logger.info(f"Stored {inserted} new change records")
        return inserted

    def load_records(self, project: Optional[str] = None) -> List[ChangeRecord]:
        with session_scope(self.session_factory) as db:
            query = db.query(ChangeRecordRow)
            if project is not None:
                query = query.filter(ChangeRecordRow.project == project)
            rows = query.order_by(ChangeRecordRow.created_at, ChangeRecordRow.id).all()
            return [ChangeRecord(**{k: getattr(row, k) for k in RECORD_FIELDS}) for row in rows]

    def count(self) -> int:
        with session_scope(self.session_factory) as db:
            return db.query(ChangeRecordRow).count()


store_service = StoreService()
