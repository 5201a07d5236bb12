"""Runs a scenario grid, inline or across worker processes."""
from concurrent.futures import ProcessPoolExecutor
from functools import partial

from modules.run_logger.logger import RunLogger
from .reports import ReportGenerator, write_csv
from .scenarios import Cell, ScenarioConfig, build_cells, run_cell


def _run_cell_logged(cell: Cell, cfg: ScenarioConfig) -> list[dict]:
    return run_cell(cell, cfg, RunLogger(f"experiment.{cell.scenario}"))


class GridRunner:
    """Evaluates every cell of a scenario and collects rows in grid order.

    Cells are independent: each one re-derives its data from the seed, so
    the rows do not depend on the number of workers.
    """

    def __init__(self, cfg: ScenarioConfig, logger: RunLogger | None = None):
        self.cfg = cfg
        self.logger = logger or RunLogger("experiment")
        self.reports = ReportGenerator(self.logger)

    def cells(self) -> list[Cell]:
        return build_cells(self.cfg)

    def run(self) -> list[dict]:
        cells = self.cells()
        self.logger.log_system_event(
            "Experiment Started",
            f"Scenario: {self.cfg.scenario}\nCells: {len(cells)}\nJobs: {self.cfg.jobs}\nSeed: {self.cfg.seed}",
        )
        worker = partial(_run_cell_logged, cfg=self.cfg)
        if self.cfg.jobs == 1 or len(cells) == 1:
            batches = [worker(cell) for cell in cells]
        else:
            with ProcessPoolExecutor(max_workers=self.cfg.jobs) as pool:
                batches = list(pool.map(worker, cells))

        rows = [row for batch in batches for row in batch]
        for row in rows:
            self.logger.log_experiment_row(row)
        if self.cfg.out is not None:
            path = write_csv(rows, self.cfg.out)
            self.logger.log_info("Results Written", str(path))
        self.reports.log_savings(rows, self.cfg.scenario)
        return rows


def run_fig1(cfg: ScenarioConfig, logger: RunLogger | None = None) -> list[dict]:
    return GridRunner(cfg.model_copy(update={"scenario": "fig1"}), logger).run()


def run_continuous(cfg: ScenarioConfig, logger: RunLogger | None = None) -> list[dict]:
    return GridRunner(cfg.model_copy(update={"scenario": "continuous"}), logger).run()


def run_fig4(cfg: ScenarioConfig, logger: RunLogger | None = None) -> list[dict]:
    return GridRunner(cfg.model_copy(update={"scenario": "fig4"}), logger).run()
