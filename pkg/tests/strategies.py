"""Hypothesis strategies drawing specs from the production ranges."""

from __future__ import annotations

from hypothesis import strategies as st

from mrcap.model import JobClassSpec


@st.composite
def job_specs(draw, wide_bounds: bool = False) -> JobClassSpec:
    h_up = draw(st.integers(5, 20))
    if wide_bounds:
        h_low = draw(st.integers(1, h_up))
    else:
        h_low = int(0.8 * h_up)
    return JobClassSpec(
        id=draw(st.text("abcdefgh", min_size=1, max_size=4)),
        A=draw(st.floats(656.0, 107488.0)),
        B=draw(st.floats(1854.0, 11430.0)),
        C=draw(st.floats(132.0, 720.0)),
        D=draw(st.floats(900.0, 1500.0)),
        cM=draw(st.integers(1, 4)),
        cR=draw(st.integers(1, 4)),
        Hup=h_up,
        Hlow=h_low,
        m=draw(st.floats(15000.0, 30000.0)),
        rhoUp=draw(st.floats(5.0, 20.0)),
    )
