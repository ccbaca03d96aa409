"""HTTP front end for one loaded index.

The index is immutable, so a single instance serves concurrent requests.
"""

from __future__ import annotations

import binascii

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .index import SelfIndex


class LocateRequest(BaseModel):
    pattern: str = Field(min_length=1)
    hex: bool = False


class LocateResponse(BaseModel):
    count: int
    positions: list[int]


class ExtractRequest(BaseModel):
    pos: int = Field(ge=1, description="1-based start position")
    length: int = Field(ge=0)


class ExtractResponse(BaseModel):
    hex: str
    text: str


def create_app(index: SelfIndex) -> FastAPI:
    app = FastAPI(title="gcindex", version="1")

    @app.post("/locate", response_model=LocateResponse)
    def locate(req: LocateRequest) -> LocateResponse:
        if req.hex:
            try:
                pattern = binascii.unhexlify(req.pattern)
            except (binascii.Error, ValueError) as exc:
                raise HTTPException(400, f"bad hex pattern: {exc}") from exc
        else:
            pattern = req.pattern.encode("utf-8")
        if not pattern:
            raise HTTPException(400, "empty pattern")
        positions = index.locate(pattern)
        return LocateResponse(count=len(positions), positions=positions)

    @app.post("/extract", response_model=ExtractResponse)
    def extract(req: ExtractRequest) -> ExtractResponse:
        try:
            data = index.extract(req.pos, req.length)
        except IndexError as exc:
            raise HTTPException(400, str(exc)) from exc
        return ExtractResponse(hex=data.hex(), text=data.decode("utf-8", "replace"))

    @app.get("/stats")
    def stats() -> dict[str, int | float]:
        return index.stats().as_dict()

    return app
