"""Create change_records

Revision ID: 4b7c2d91e0a3
Revises: 
Create Date: 2026-10-19 09:12:31.204117

"""
from alembic import op
import sqlalchemy as sa


# revision identifiers, used by Alembic.
revision = '4b7c2d91e0a3'
down_revision = None
branch_labels = None
depends_on = None


def upgrade():
    op.create_table('change_records',
    sa.Column('id', sa.String(length=64), nullable=False),
    sa.Column('project', sa.String(length=255), nullable=False),
    sa.Column('commit_before', sa.String(length=64), nullable=True),
    sa.Column('commit_after', sa.String(length=64), nullable=True),
    sa.Column('m_old', sa.Text(), nullable=False),
    sa.Column('m_new', sa.Text(), nullable=False),
    sa.Column('c_old', sa.Text(), nullable=False),
    sa.Column('c_new', sa.Text(), nullable=False),
    sa.Column('created_at', sa.DateTime(timezone=True), server_default=sa.text('CURRENT_TIMESTAMP'), nullable=True),
    sa.PrimaryKeyConstraint('id')
    )
    op.create_index(op.f('ix_change_records_id'), 'change_records', ['id'], unique=False)
    op.create_index(op.f('ix_change_records_project'), 'change_records', ['project'], unique=False)


def downgrade():
    op.drop_index(op.f('ix_change_records_project'), table_name='change_records')
    op.drop_index(op.f('ix_change_records_id'), table_name='change_records')
    op.drop_table('change_records')
