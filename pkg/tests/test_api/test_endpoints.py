"""
Tests para los endpoints HTTP.
Usa TestClient de FastAPI para simular peticiones.
"""
from fastapi.testclient import TestClient

from hjrate.main import app

client = TestClient(app)


def _sweep(problem, **extra):
    body = {"problem": problem, "epsilons": {"eps_max": 0.1, "eps_min": 0.001, "count": 4}, "reference": "oracle"}
    body.update(extra)
    return body


class TestHealth:
    """Tests de los endpoints de estado."""

    def test_health(self):
        """/health responde healthy."""
        response = client.get("/health")

        assert response.status_code == 200
        data = response.json()
        assert data["status"] == "healthy"
        assert "version" in data

    def test_root(self):
        """La raíz lista los verbos disponibles."""
        response = client.get("/")

        assert response.status_code == 200
        assert "sweeps" in response.json()["verbs"]


class TestChecks:
    """Tests de certify, envelope-check y ledger."""

    def test_certify(self, transport_config):
        """Certificación de un transporte constante."""
        response = client.post("/api/certify", json={"problem": transport_config, "samples": 200})

        assert response.status_code == 200
        data = response.json()
        assert data["passed"] is True
        assert len(data["reports"]) == 2

    def test_certify_invalid_body(self):
        """Problema sin Hamiltoniano."""
        response = client.post("/api/certify", json={"problem": {"u0": {"kind": "sine"}}})

        assert response.status_code == 422

    def test_certify_unknown_kind(self, transport_config):
        """Un tipo de catálogo desconocido es un error de configuración."""
        transport_config["hamiltonian"]["kind"] = "hamiltoniano-libre"

        response = client.post("/api/certify", json={"problem": transport_config})

        assert response.status_code in (400, 422)

    def test_envelope_check(self):
        """Batería para una constante."""
        response = client.post("/api/envelope-check", json={
            "grid": {"dim": 1, "N": 16, "L": 1.0},
            "values": [1.5] * 16,
            "deltas": [0.1],
        })

        assert response.status_code == 200
        data = response.json()
        assert data["passed"] is True
        assert len(data["semiconvexity"]) == 2

    def test_envelope_check_bad_values(self):
        """Valores que no forman la malla."""
        response = client.post("/api/envelope-check", json={
            "grid": {"dim": 1, "N": 16, "L": 1.0},
            "values": [0.0] * 15,
        })

        assert response.status_code == 400

    def test_ledger(self, transport_config):
        """ledger de un transporte en dos ε."""
        response = client.post("/api/ledger", json={"problem": transport_config, "epsilons": [1e-3, 1e-2]})

        assert response.status_code == 200
        summaries = response.json()["summaries"]
        assert len(summaries) == 2
        assert summaries[0]["ledger"]["exponent"] == 0.5
        assert summaries[0]["time"] == 0.25


class TestSweeps:
    """Tests de /api/sweeps."""

    def test_run_and_get(self, clean_storage, transport_config):
        """Ejecutar un barrido y recuperarlo por ID."""
        response = client.post("/api/sweeps", json=_sweep(transport_config))

        assert response.status_code == 201
        data = response.json()
        assert data["kind"] == "evolution"
        assert data["passed"] is True
        assert len(data["report"]["rows"]) == 4

        fetched = client.get(f"/api/sweeps/{data['id']}")
        assert fetched.status_code == 200
        assert fetched.json()["report"] == data["report"]

    def test_stationary_sweep(self, clean_storage, stationary_constant_config):
        """Un problema con ρ > 0 ejecuta el barrido estacionario."""
        response = client.post("/api/sweeps", json=_sweep(stationary_constant_config))

        assert response.status_code == 201
        assert response.json()["kind"] == "stationary"

    def test_list(self, clean_storage, transport_config):
        """Listar los barridos registrados."""
        client.post("/api/sweeps", json=_sweep(transport_config))
        client.post("/api/sweeps", json=_sweep(transport_config))

        response = client.get("/api/sweeps")

        assert response.status_code == 200
        assert len(response.json()) == 2

    def test_missing_oracle(self, clean_storage, forced_eikonal_config):
        """Oráculo no disponible responde 422."""
        response = client.post("/api/sweeps", json=_sweep(forced_eikonal_config))

        assert response.status_code == 422

    def test_failed_solve(self, clean_storage, transport_config):
        """Una resolución fallida responde 400."""
        transport_config["grid"]["N"] = 64
        response = client.post("/api/sweeps", json=_sweep(transport_config, reference="richardson",
                                                           solve={"dt": 0.5}))

        assert response.status_code == 400
        assert "ε=0" in response.json()["detail"]

    def test_not_found(self, clean_storage):
        """ID inexistente."""
        response = client.get("/api/sweeps/no-existe")

        assert response.status_code == 404
        assert response.json()["detail"] == "Barrido no encontrado"
