"""Tool handlers and the dispatcher's error envelopes."""

import json
from fractions import Fraction

import pytest

from csp_refuter.config import RefuterConfig
from csp_refuter.csp.io import save_instance
from csp_refuter.csp.relations import preset_family
from csp_refuter.csp.sampling import sample_instance
from csp_refuter.dispatch import (
    ALL_TOOL_DEFINITIONS,
    INTERNAL,
    IO,
    RESOURCE,
    TOOL_HANDLERS,
    USAGE,
    configure_tools,
    error_category,
    execute_tool,
)
from csp_refuter.errors import DegenerateInstance, InvalidParameters, ResourceLimit


@pytest.fixture(autouse=True)
def tools_config(cfg):
    configure_tools(cfg)
    yield cfg
    configure_tools(None)


@pytest.fixture
def instance_file(tmp_path) -> str:
    path = tmp_path / "instance.json"
    save_instance(sample_instance(preset_family("neq"), 8, 20, seed=4), path)
    return str(path)


def test_every_handler_is_defined():
    assert sorted(d["name"] for d in ALL_TOOL_DEFINITIONS) == sorted(TOOL_HANDLERS)


class TestInstanceTools:
    async def test_presets(self):
        result = await execute_tool("list_family_presets", {})
        assert result["status"] == "success"
        by_name = {p["name"]: p for p in result["data"]}
        assert by_name["neq"] == {"name": "neq", "q": 2, "k": 2, "relations": 1}
        assert by_name["nae3"]["k"] == 3

    async def test_generate_inline(self):
        result = await execute_tool("generate_instance", {"family": "neq", "n": 8, "m": 20, "seed": 4})
        data = result["data"]
        assert data["n"] == 8
        assert data["m_expected"] == 20
        assert len(data["instance"]["constraints"]) == data["m"]

    async def test_generate_to_file(self, tmp_path):
        path = tmp_path / "out.json"
        result = await execute_tool("generate_instance", {"family": "xor3", "n": 6, "m": 12, "output": str(path)})
        assert result["data"]["output"] == str(path)
        assert "instance" not in result["data"]
        assert json.loads(path.read_text())["n"] == 6

    async def test_describe_with_optimum(self, instance_file):
        result = await execute_tool("describe_instance", {"instance": instance_file, "exhaustive": True})
        data = result["data"]
        assert 0.5 <= data["opt"] <= 1.0
        assert len(data["witness"]) == 8
        assert data["relation_distribution"] == [1.0]


class TestLPTools:
    async def test_opt_t_of_neq(self):
        result = await execute_tool("compute_opt_t", {"family": "neq", "t": 2, "epsilon": 0.1})
        assert result["data"]["opt_t"] == pytest.approx(0.5, abs=0.1)
        assert result["data"]["net_points"] == len(result["data"]["per_point"])

    async def test_relation_lp_strong_duality(self):
        result = await execute_tool("solve_relation_lp", {"family": "neq", "marginal": [0.5, 0.5], "exact": True})
        data = result["data"]
        assert data["primal"] == pytest.approx(0.5)
        assert data["dual"] == pytest.approx(data["primal"])
        assert data["dominates"]

    async def test_relation_index_checked(self):
        result = await execute_tool("solve_relation_lp", {"family": "neq", "marginal": [0.5, 0.5], "relation": 3})
        assert result["status"] == "error"
        assert result["error_type"] == "InvalidParameters"
        assert result["category"] == USAGE

    async def test_twise_verdict(self):
        result = await execute_tool("check_twise", {"family": "neq", "t": 2})
        assert result["data"]["answer"] == "no"
        assert len(result["data"]["relations"]) == 1


class TestRefutationTools:
    async def test_refute_verify_summarize(self, instance_file, tmp_path):
        cert_path = tmp_path / "cert.json"
        refuted = await execute_tool("refute_instance", {"instance": instance_file, "output": str(cert_path)})
        assert refuted["status"] == "success"
        assert not refuted["data"]["heuristic"]

        verified = await execute_tool(
            "verify_certificate_file", {"certificate": str(cert_path), "instance": instance_file}
        )
        assert verified["data"]["passed"]

        summary = await execute_tool("summarize_certificate", {"certificate": str(cert_path)})
        assert summary["data"]["bound"] == refuted["data"]["bound"]
        assert summary["data"]["relations"] == {"0": "certified"}

    async def test_brute_force_opt(self, instance_file):
        result = await execute_tool("brute_force_opt", {"instance": instance_file})
        data = result["data"]
        assert data["opt"] == pytest.approx(float(Fraction(data["fraction"])))
        assert len(data["witness"]) == 8


class TestErrorEnvelopes:
    async def test_unknown_tool(self):
        result = await execute_tool("explode", {})
        assert result == {
            "status": "error",
            "error": "Unknown tool: explode",
            "error_type": "UnknownTool",
            "category": USAGE,
        }

    async def test_unknown_preset(self):
        result = await execute_tool("generate_instance", {"family": "sudoku", "n": 4, "m": 2})
        assert result["category"] == USAGE
        assert "Unknown family preset" in result["error"]

    async def test_missing_file(self, tmp_path):
        result = await execute_tool("describe_instance", {"instance": str(tmp_path / "nope.json")})
        assert result["category"] == IO

    async def test_bad_arguments(self):
        result = await execute_tool("list_family_presets", {"verbose": True})
        assert result["error_type"] == "TypeError"
        assert result["category"] == USAGE

    async def test_oracle_cap(self, instance_file):
        configure_tools(RefuterConfig(threads=1, oracle_cap=16))
        result = await execute_tool("brute_force_opt", {"instance": instance_file})
        assert result["error_type"] == "ResourceLimit"
        assert result["category"] == RESOURCE


def test_error_categories():
    assert error_category(ResourceLimit("dense", 10, 5)) == RESOURCE
    assert error_category(InvalidParameters("bad")) == USAGE
    assert error_category(DegenerateInstance("empty")) == USAGE
    assert error_category(FileNotFoundError("x")) == IO
    assert error_category(RuntimeError("boom")) == INTERNAL
