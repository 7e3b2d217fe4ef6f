from dataclasses import dataclass, field
from enum import Enum


@dataclass(frozen=True)
class AbstractLocation:
    """
    One abstract memory cell: a declaration site plus its data location.

    Mapping indices and struct fields collapse onto the declaration, so
    ``m[i]`` and ``m[j]`` share a location.
    """
    decl_id: int
    data_location: str
    name: str = field(default='', compare=False)
    state: bool = field(default=False, compare=False)

    def __str__(self) -> str:
        return self.name or f"#{self.decl_id}"


MSG_SENDER = AbstractLocation(-1, 'global', 'msg.sender')
MSG_VALUE = AbstractLocation(-2, 'global', 'msg.value')
TIMESTAMP = AbstractLocation(-3, 'global', 'block.timestamp')
BLOCK_NUMBER = AbstractLocation(-4, 'global', 'block.number')

GLOBAL_MEMBERS = {
    ('msg', 'sender'): MSG_SENDER,
    ('msg', 'value'): MSG_VALUE,
    ('block', 'timestamp'): TIMESTAMP,
    ('block', 'number'): BLOCK_NUMBER,
}


class AccessMode(Enum):
    CREATE = 'create'
    READ = 'read'
    WRITE = 'write'
    DELETE = 'delete'

    @property
    def is_write(self) -> bool:
        return self is not AccessMode.READ


@dataclass(frozen=True)
class AccessEvent:
    statement_id: int
    target: AbstractLocation
    mode: AccessMode
    strong: bool = False
