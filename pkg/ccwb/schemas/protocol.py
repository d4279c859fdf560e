# ccwb/schemas/protocol.py
"""
Pydantic schema for the JSON description of a classical protocol.

Each node is either internal (owner + bits + children) or a leaf
(value for global leaves, out_a + out_b for local leaves). Node 0 is the root.
"""
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, model_validator


class ProtocolNode(BaseModel):
    """One node of the protocol tree"""
    id: int = Field(..., ge=0, description="Node id, unique within the document")
    owner: Optional[Literal["A", "B"]] = Field(None, description="Speaker of an internal node")
    bits: Optional[List[int]] = Field(None, description="Bit sent for every input of the owner")
    children: Optional[List[int]] = Field(None, description="Child ids for bit 0 and bit 1")
    value: Optional[int] = Field(None, ge=0, description="Result of a global leaf")
    out_a: Optional[List[Optional[int]]] = Field(None, description="Alice's output per row (local leaf)")
    out_b: Optional[List[Optional[int]]] = Field(None, description="Bob's output per column (local leaf)")

    @model_validator(mode="after")
    def check_shape(self):
        if self.owner is not None:
            if self.bits is None or self.children is None or len(self.children) != 2:
                raise ValueError(f"internal node {self.id} needs bits and exactly two children")
            if any(b not in (0, 1) for b in self.bits):
                raise ValueError(f"internal node {self.id} has a non-binary bit table")
        elif self.value is None and (self.out_a is None or self.out_b is None):
            raise ValueError(f"leaf {self.id} needs a value or both output maps")
        return self


class ProtocolDocument(BaseModel):
    """A classical protocol as a flat node list"""
    n_rows: int = Field(..., ge=1, description="Number of Alice inputs")
    n_cols: int = Field(..., ge=1, description="Number of Bob inputs")
    nodes: List[ProtocolNode]

    class Config:
        json_schema_extra = {
            "example": {
                "n_rows": 2,
                "n_cols": 2,
                "nodes": [
                    {"id": 0, "owner": "A", "bits": [0, 1], "children": [1, 4]},
                    {"id": 1, "owner": "B", "bits": [1, 0], "children": [2, 3]},
                    {"id": 2, "value": 0},
                    {"id": 3, "value": 1},
                    {"id": 4, "owner": "B", "bits": [0, 1], "children": [5, 6]},
                    {"id": 5, "value": 0},
                    {"id": 6, "value": 1}
                ]
            }
        }
