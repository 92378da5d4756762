from sqlalchemy import Column, String, DateTime, Text
from sqlalchemy.sql import func
from app.core.database import Base

class ChangeRecordRow(Base):
    __tablename__ = "change_records"

    id = Column(String(64), primary_key=True, index=True)
    project = Column(String(255), nullable=False, index=True)
    commit_before = Column(String(64), default="")
    commit_after = Column(String(64), default="")

    m_old = Column(Text, nullable=False)
    m_new = Column(Text, nullable=False)
    c_old = Column(Text, nullable=False)
    c_new = Column(Text, nullable=False)

    created_at = Column(DateTime(timezone=True), server_default=func.now())
