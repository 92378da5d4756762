"""Load a change-record JSONL file into the relational store."""
import sys

from app.services.corpus_service import corpus_service
from app.services.store_service import store_service


def seed(path: str) -> None:
    examples = corpus_service.load(path)
    store_service.create_tables()
    inserted = store_service.save_records(e.record for e in examples)
    print(f"✅ Stored {inserted} new change records ({store_service.count()} total)")


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print("usage: python -m scripts.seed_data <records.jsonl>")
        sys.exit(2)
    seed(sys.argv[1])
