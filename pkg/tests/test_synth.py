from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fraudlens.events import EventStore, occurrence_bucket
from fraudlens.scoring import CorpusScorer
from fraudlens.synth import (
    BUCKETS,
    DEFAULT_HISTOGRAM,
    SCENARIO_KINDS,
    SynthError,
    SynthSpec,
    allocate_buckets,
    generate_corpus,
)


# every kind once, plus a second lookalike so both the gated and the
# under-gate variants are present
FULL = SCENARIO_KINDS + ("monitoring_lookalike",)


def test_spec_validation():
    with pytest.raises(SynthError):
        SynthSpec(employees=0)
    with pytest.raises(SynthError):
        SynthSpec(occurrence_histogram={"1": 0.9, "2-5": 0.2, "6-10": 0.0, ">10": -0.1})
    with pytest.raises(SynthError):
        SynthSpec(scenarios=("nonsense",))
    with pytest.raises(SynthError):
        SynthSpec(scenarios=("monthly_fraud",), span_days=90)


@given(st.integers(1, 5000))
def test_allocation_sums_and_stays_within_one(n):
    counts = allocate_buckets(n, DEFAULT_HISTOGRAM)
    assert sum(counts.values()) == n
    for bucket in BUCKETS:
        exact = n * DEFAULT_HISTOGRAM[bucket]
        assert math.floor(exact) <= counts[bucket] <= math.floor(exact) + 1


def test_allocation_known_split():
    # 830 * (0.662, 0.316, 0.014, 0.008) floors to (549, 262, 11, 6); the two
    # leftover seats go to the largest remainders (.64 and .62)
    assert allocate_buckets(830, DEFAULT_HISTOGRAM) == {"1": 549, "2-5": 262, "6-10": 12, ">10": 7}


def test_generation_deterministic_per_seed():
    spec = SynthSpec(clients=150, scenarios=FULL, seed=11)
    a = generate_corpus(spec)
    b = generate_corpus(spec)
    assert a.manifest_text() == b.manifest_text()
    assert [e.to_line() for e in a.events] == [e.to_line() for e in b.events]
    assert [e.to_line() for e in a.auth_events] == [e.to_line() for e in b.auth_events]

    c = generate_corpus(SynthSpec(clients=150, scenarios=FULL, seed=12))
    assert c.manifest_text() != a.manifest_text()


def test_background_histogram_matches_targets():
    result = generate_corpus(SynthSpec(seed=3))  # no scenarios: the realism case
    store = EventStore(None)
    store.add_events(result.events)
    hist = store.stats().client_occurrence_histogram
    for bucket, target in DEFAULT_HISTOGRAM.items():
        assert hist[bucket] == pytest.approx(target, abs=0.02)


def test_manifest_counts_match_corpus():
    result = generate_corpus(SynthSpec(clients=200, scenarios=("monthly_fraud",), seed=5))
    manifest = result.manifest
    assert manifest["totals"]["events"] == len(result.events)
    assert manifest["totals"]["auth_events"] == len(result.auth_events)
    assert manifest["spec"]["clients"] == 200
    # bucket counts describe the background portion before injection;
    # all injected events carry a scenario employee
    counts: dict[str, int] = {}
    scenario_emps = {r["employee"] for r in manifest["scenarios"]}
    scenario_emps.update(e for r in manifest["scenarios"] for e in r.get("employees", ()))
    for e in result.events:
        if e.employee in scenario_emps:
            continue
        counts[e.client] = counts.get(e.client, 0) + 1
    realized = {b: 0 for b in BUCKETS}
    for n in counts.values():
        realized[occurrence_bucket(n)] += 1
    assert realized == manifest["background"]["bucket_counts"]


def test_scenario_entities_extend_background_id_space():
    spec = SynthSpec(employees=7, clients=100, scenarios=("monthly_fraud", "unauthorized_action"), seed=2)
    result = generate_corpus(spec)
    records = {r["kind"]: r for r in result.manifest["scenarios"]}
    fraud_emp = records["monthly_fraud"]["employee"]
    unauth_emp = records["unauthorized_action"]["employee"]
    assert fraud_emp == "E0007"  # first id after the 7 background employees
    assert unauth_emp != fraud_emp
    background_emps = {e.employee for e in result.events if e.employee not in (fraud_emp, unauth_emp)}
    assert all(e < fraud_emp for e in background_emps)


def test_profiles_cover_realized_usage():
    result = generate_corpus(SynthSpec(clients=150, scenarios=FULL, seed=7))
    profiles = result.profiles
    for e in result.events:
        allowed = profiles.authorized_for(e.employee)
        if e.action == "ACCOUNT-DELETE":
            assert e.action in profiles.unauthorized_actions
            continue  # the offending employee still trips the action check first
        assert allowed is not None and e.system in allowed
    assert "FMS" in profiles.fms_systems


def test_scenarios_reproduce_expected_outcomes():
    spec = SynthSpec(clients=250, scenarios=FULL, seed=1)
    result = generate_corpus(spec)
    store = EventStore(None)
    store.add_events(result.events)
    scorer = CorpusScorer(store, profiles=result.profiles)
    tables = scorer.score_corpus()
    records = {r.get("variant", r["kind"]): r for r in result.manifest["scenarios"]}

    fraud = records["monthly_fraud"]
    score = tables.pair_scores[(fraud["employee"], fraud["client"])]
    assert score.value == 1.0
    assert score.vector.components == (1, 1, 1, 1, 1)

    unauth = records["unauthorized_action"]
    assert tables.employee_scores[unauth["employee"]].value == 1.0
    assert tables.employee_scores[unauth["employee"]].short_circuit.reason == "unauthorized_action"

    split = records["split_client"]
    client_vec = tables.client_scores[split["client"]].vector.components
    assert client_vec[0] == 1 and client_vec[1] == 1
    for emp in split["employees"]:
        assert tables.pair_scores[(emp, split["client"])].vector.components[0] == 0

    heavy = records["heavy"]
    light = records["light"]
    heavy_score = tables.pair_scores[(heavy["employee"], heavy["client"])]
    light_score = tables.pair_scores[(light["employee"], light["client"])]
    assert heavy_score.vector.components[0] == 1  # volume passes even FMS-weighted
    assert light_score.vector.components[0] == 0  # weighting keeps it under the gate
    assert heavy_score.value < 1.0 and light_score.value < 1.0

    # the planted fraud pair tops every employee severity
    assert tables.employee_scores[fraud["employee"]].value == max(
        s.value for s in tables.employee_scores.values()
    )
