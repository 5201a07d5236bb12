from .scenarios import (
    ScenarioConfig, Cell, DEMO_SPVS, DEMO_PREFERENCES, gen_data, build_cells, run_cell, run_demo,
)
from .reports import CSV_COLUMNS, ReportGenerator, write_csv, read_csv
from .grid_runner import GridRunner, run_fig1, run_continuous, run_fig4
