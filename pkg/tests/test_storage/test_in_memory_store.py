"""
Tests para el registro en memoria de barridos.
"""
import time

import hjrate.storage.in_memory_store as store
from hjrate.models.sweep import SweepReport, SweepRow


def _report(name: str, satisfied: bool = True) -> SweepReport:
    row = SweepRow(epsilon=1e-3, time=0.0, points_per_axis=32, sup_error=0.1, error_plus=0.1,
                   error_minus=0.0, bound_rhs=0.2, discretization_proxy=1e-9,
                   contaminated=False, bound_satisfied=satisfied)
    return SweepReport(name=name, kind="stationary", reference="oracle", epsilon_range=(1e-3, 1e-1),
                       rows=[row], theoretical_exponent=0.25, contamination_factor=3.0, slack_factor=3.0)


class TestSaveRun:
    """Tests de registro de barridos."""

    def test_save_assigns_id(self, clean_storage):
        """Registrar un reporte le asigna un ID único."""
        first = store.save_run(_report("a"))
        second = store.save_run(_report("b"), output_dir="/tmp/out")

        assert first.id != second.id
        assert first.id in store.runs_db
        assert second.output_dir == "/tmp/out"
        assert first.kind == "stationary"

    def test_passed_follows_report(self, clean_storage):
        """El estado del registro refleja las cotas del reporte."""
        assert store.save_run(_report("ok")).passed is True
        assert store.save_run(_report("mal", satisfied=False)).passed is False


class TestQueries:
    """Tests de consulta del registro."""

    def test_get_run(self, clean_storage):
        """Obtener un barrido existente por ID."""
        run = store.save_run(_report("a"))

        assert store.get_run(run.id) is run

    def test_get_missing_run(self, clean_storage):
        """Un ID inexistente devuelve None."""
        assert store.get_run("no-existe") is None

    def test_list_runs_in_creation_order(self, clean_storage):
        """Los barridos se listan por fecha de creación."""
        first = store.save_run(_report("a"))
        time.sleep(0.001)
        second = store.save_run(_report("b"))

        assert [run.id for run in store.list_runs()] == [first.id, second.id]

    def test_clear_runs(self, clean_storage):
        """Vaciar el registro."""
        store.save_run(_report("a"))

        store.clear_runs()

        assert store.list_runs() == []
