"""Async behavior tests for boundary tracing."""

import anyio
import pytest

from secrecy_region.errors import SolverError, ValidationError
from secrecy_region.region_tracer import (
    default_ratios,
    trace_region,
    trace_region_async,
)


class TestTraceRegionAsync:
    """Tests for worker-thread boundary tracing."""

    @pytest.mark.asyncio
    async def test_matches_sequential(self, mixed_channel):
        """Concurrent solving gives the sequential boundary."""
        ratios = default_ratios(17)
        expected = trace_region(mixed_channel, 3.0, ratios)
        result = await trace_region_async(mixed_channel, 3.0, ratios, threads=4)

        assert [p.rate for p in result.points] == [p.rate for p in expected.points]
        assert [p.case for p in result.points] == [p.case for p in expected.points]

    @pytest.mark.asyncio
    async def test_single_thread_limiter(self, single_channel):
        """threads=1 still solves every point."""
        result = await trace_region_async(single_channel, 2.0, [0.5, 1.0, 2.0])

        assert len(result) == 3

    @pytest.mark.asyncio
    async def test_first_failure_by_ratio(self, mixed_channel):
        """When several points fail, the smallest ratio is reported."""
        with pytest.raises(SolverError) as exc_info:
            await trace_region_async(
                mixed_channel, -1.0, [0.1, 1.0, 10.0], threads=3
            )

        assert exc_info.value.ratio == 0.1

    @pytest.mark.asyncio
    async def test_concurrent_traces(self, mixed_channel, single_channel):
        """Independent traces can share the event loop."""
        results = {}

        async def trace(name, channel):
            results[name] = await trace_region_async(
                channel, 2.0, default_ratios(9), threads=2
            )

        async with anyio.create_task_group() as tg:
            tg.start_soon(trace, "mixed", mixed_channel)
            tg.start_soon(trace, "single", single_channel)

        assert len(results["mixed"]) == 9
        assert len(results["single"]) == 9

    @pytest.mark.asyncio
    async def test_blocking_trace_refuses_running_loop(self, mixed_channel):
        """Worker threads from inside a loop must go through the async API."""
        with pytest.raises(ValidationError) as exc_info:
            trace_region(mixed_channel, 3.0, default_ratios(5), threads=2)

        assert "trace_region_async" in exc_info.value.message
        assert exc_info.value.details["parameter"] == "threads"

    @pytest.mark.asyncio
    async def test_single_thread_trace_inside_loop(self, single_channel):
        """threads=1 never starts a loop, so it works from async code."""
        result = trace_region(single_channel, 2.0, [0.5, 2.0])

        assert len(result) == 2
