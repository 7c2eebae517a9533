from fastapi.testclient import TestClient

from main import app

client = TestClient(app)


def test_root_lists_endpoints():
    response = client.get("/")
    assert response.status_code == 200
    assert response.json()["endpoints"]["solve"] == "/api/solve"


def test_solve(t3_text):
    response = client.post("/api/solve", json={"graph": t3_text, "algorithm": "history"})
    assert response.status_code == 200
    data = response.json()
    assert data["mu_star"] == "13/2"
    assert data["mu_star_decimal"] == "6.5"
    assert data["witness"] == [1, 2]
    assert data["iterations"] == 6


def test_solve_cross_check(t3_text):
    response = client.post("/api/solve", json={"graph": t3_text, "algorithm": "karp", "cross_check": True})
    assert response.status_code == 200
    assert len(response.json()["agreeing_solvers"]) == 9


def test_solve_rejects_malformed_graph():
    response = client.post("/api/solve", json={"graph": "p dmdp 2 1\ne 0 1 1"})
    assert response.status_code == 400
    assert "no out-edge" in response.json()["detail"]


def test_solve_rejects_unknown_algorithm(t3_text):
    response = client.post("/api/solve", json={"graph": t3_text, "algorithm": "simplex"})
    assert response.status_code == 400


def test_verify(t3_text):
    response = client.post("/api/verify", json={"graph": t3_text, "mu": "6"})
    assert response.status_code == 200
    assert response.json()["positive_cycle"] is True

    response = client.post("/api/verify", json={"graph": t3_text, "mu": "13/2"})
    assert response.json()["positive_cycle"] is False


def test_generate():
    response = client.post("/api/generate", json={"model": "two-out", "n": 6, "seed": 4})
    assert response.status_code == 200
    data = response.json()
    assert (data["n"], data["m"]) == (6, 12)
    assert data["graph"].startswith("p dmdp 6 12\n")


def test_generate_validation():
    assert client.post("/api/generate", json={"model": "worst-case"}).status_code == 400
    assert client.post("/api/generate", json={"model": "lattice", "n": 3}).status_code == 400
