"""
Tests for the HTTP API.
Run with: pytest test_api.py
"""

import csv
import io

import pytest
from fastapi.testclient import TestClient

from app.main import app
from app.services.scenarios import CSV_HEADER

client = TestClient(app)

SEMI_DFS = {
    "topology": "single_bath",
    "initial_state": "psi_d",
    "kappa": 0.01,
    "beta": 10.0,
    "spacing": "log",
    "t_start": 0.1,
    "t_end": 1e6,
    "t_count": 400,
}


def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_root():
    response = client.get("/")
    assert response.status_code == 200
    assert response.json()["status"] == "running"


def test_presets():
    response = client.get("/api/v1/presets")
    assert response.status_code == 200
    presets = response.json()
    assert "fig4" in presets
    assert presets["fig6"]["sweep"]["axis"] == "beta"


def test_report():
    response = client.post("/api/v1/report", json=SEMI_DFS)
    assert response.status_code == 200
    body = response.json()
    assert 300.0 < body["gamma_ratio"] < 3000.0
    assert body["relaxation"]["converged"] is True
    assert body["oracle_max_deviation"] < 1e-8
    assert len(body["energies"]) == 4


def test_scenario_csv():
    payload = {"initial_state": "psi_a", "spacing": "linear", "t_start": 0.0, "t_end": 50.0,
               "t_count": 6}
    response = client.post("/api/v1/scenario", json=payload)
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("text/csv")
    rows = list(csv.reader(io.StringIO(response.text)))
    assert rows[0] == CSV_HEADER
    assert len(rows) == 7
    assert float(rows[1][2]) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize(
    "payload",
    [
        {"kappa": 5.0},
        {"beta": -1.0},
        {"colour": "blue"},
        {"initial_state": "psi_z"},
        {"spacing": "log", "t_start": 0.0},
        {"initial_state": "custom"},
    ],
)
def test_invalid_scenarios_rejected(payload):
    assert client.post("/api/v1/scenario", json=payload).status_code == 422


def test_non_physical_custom_state_is_bad_request():
    payload = {
        "initial_state": "custom",
        "rho_real": ",".join(["0.5"] * 16),
        "spacing": "linear",
        "t_start": 0.0,
        "t_end": 10.0,
        "t_count": 3,
    }
    response = client.post("/api/v1/report", json=payload)
    assert response.status_code == 400
    assert "rho_real" in response.json()["detail"]
