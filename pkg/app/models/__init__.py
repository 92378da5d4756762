from app.core.database import Base
from .change_record import ChangeRecordRow

__all__ = ["Base", "ChangeRecordRow"]
