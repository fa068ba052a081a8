from __future__ import annotations

import itertools

import pytest

from defaas.model import Invocation, Mode

_counter = itertools.count(1)


def make_inv(
    deadline: float,
    arrival: float = 0.0,
    inv_id: str | None = None,
    function: str = "fn",
    mode: Mode = Mode.ASYNC,
    workflow_id: str = "w1",
    parent_id: str | None = None,
) -> Invocation:
    return Invocation(
        id=inv_id or f"t{next(_counter):05d}",
        function=function,
        mode=mode,
        arrival_time=arrival,
        deadline=deadline if mode is Mode.ASYNC else None,
        workflow_id=workflow_id,
        parent_id=parent_id,
    )


@pytest.fixture
def inv_factory():
    return make_inv
