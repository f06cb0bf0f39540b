import pytest
from fastapi.testclient import TestClient

from webapp.main import app

client = TestClient(app)


def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_forward_kinematics():
    data = client.get("/api/fk", params={"theta": 1.0}).json()
    assert data["z_mm"] == pytest.approx(214.9, abs=0.1)
    assert data["base_yaw_rad"] == pytest.approx(0.5)

    data = client.get("/api/fk", params={"theta": 0.0, "degrees": True}).json()
    assert data["z_mm"] == pytest.approx(135.2, abs=0.1)


def test_out_of_domain_is_unprocessable():
    response = client.get("/api/fk", params={"theta": 2.0})
    assert response.status_code == 422
    assert response.json()["type"] == "OutOfDomainError"


def test_inverse_kinematics():
    data = client.get("/api/ik", params={"z": 180.0, "mode": "interpolated"}).json()
    assert 0.0 < data["theta_rad"] < 1.0
    assert data["saturated"] is False
    assert client.get("/api/ik", params={"z": 500.0}).json()["saturated"] is True
    assert client.get("/api/ik", params={"z": 180.0, "mode": "cubic"}).status_code == 422


def test_table():
    data = client.get("/api/table").json()
    assert len(data["entries"]) == 45
    assert data["z_max_mm"] - data["z_min_mm"] == pytest.approx(79.65, abs=0.1)
    assert len(client.get("/api/table", params={"n": 5}).json()["entries"]) == 5


@pytest.mark.parametrize("n", [10**9, 10001, 1, 0, -5])
def test_table_size_is_bounded(n):
    response = client.get("/api/table", params={"n": n})
    assert response.status_code == 422


def test_conditions():
    data = client.get("/api/conditions").json()
    assert len(data) == 10
    assert data[3] == {
        "condition": "RM+EC",
        "slug": "RM_EC",
        "robots": 1,
        "rotation": True,
        "expansion": True,
        "locomotion": False,
    }


def test_script():
    data = client.get("/api/script/RM_EC", params={"robots": 2, "seed": 4}).json()
    assert data["condition"] == "RM+EC (2 robots)"
    assert len(data["periods_s"]) == 2
    assert len(data["samples"]) == 402


def test_unknown_condition():
    response = client.get("/api/script/JUMP")
    assert response.status_code == 422
    assert response.json()["type"] == "InvalidConditionError"


def test_simulation():
    data = client.get("/api/simulate/EC", params={"ideal_lift": True}).json()
    assert data["condition"] == "EC"
    assert data["traces"][0]["metadata"]["ideal_lift"] is True
    assert len(data["traces"][0]["samples"]) == 201
    summary = data["summary"][0]
    assert abs(summary["final_yaw_rad"]) < 1e-6
    assert summary["stroke_mm"] == pytest.approx(70.0, abs=1e-3)


def test_simulation_with_pid_lift():
    data = client.get("/api/simulate/LOC").json()
    assert data["summary"][0]["displacement_mm"] == pytest.approx(1500.0, abs=1e-3)
    assert data["traces"][0]["metadata"]["ideal_lift"] is False
