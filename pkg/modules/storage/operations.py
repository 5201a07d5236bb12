import csv
import json
from pathlib import Path
from typing import TypeVar

import numpy as np
from pydantic import BaseModel
from pydantic import ValidationError as SchemaError

from config.settings import settings
from modules.core.types import CodebookSet, DesignResult, DiscretePreference, ItemSpec
from modules.designers.continuous import PreferenceSpec, SampleSet
from modules.designers.twouser import JointPreference, TwoUserDesign, TwoUserResult, joint_pref_alpha
from modules.error_handler.errors import ConfigError, EdgeCodingError
from .models import (
    CodebookSetFile, DesignResultFile, JointPreferenceFile, PreferenceFile,
    PreferenceSpecFile, TwoUserDesignFile,
)

M = TypeVar("M", bound=BaseModel)

RAW_ALPHABET = 256


def _rows(matrix) -> list[list[float]]:
    return [[float(v) for v in row] for row in np.asarray(matrix, dtype=float)]


class DesignStore:
    """Reads and writes every artifact of the toolkit.

    Relative paths resolve against `base_dir` (the results directory by
    default). JSON is written with a fixed key order and repr floats.
    """

    def __init__(self, base_dir: Path | str | None = None):
        self.base_dir = Path(base_dir) if base_dir is not None else settings.results_dir

    def resolve(self, path: Path | str) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.base_dir / path

    # ─── JSON plumbing ─────────────────────────────────────────────

    def _write_json(self, model: BaseModel, path) -> Path:
        target = self.resolve(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        text = json.dumps(model.model_dump(mode="json"), indent=2)
        target.write_text(text + "\n", encoding="utf-8")
        return target

    def _read_json(self, path, model: type[M]) -> M:
        source = self.resolve(path)
        try:
            return model.model_validate_json(source.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigError(f"file not found: {source}", path=str(source)) from e
        except SchemaError as e:
            raise ConfigError(f"{source} is not a valid {model.__name__}: {e.error_count()} error(s)",
                              path=str(source)) from e

    # ─── Preferences ───────────────────────────────────────────────

    def save_preference(self, pref: DiscretePreference, path) -> Path:
        return self._write_json(
            PreferenceFile(n=pref.n, spvs=_rows(pref.spvs), probs=[float(f) for f in pref.probs]), path,
        )

    def load_preference(self, path) -> DiscretePreference:
        data = self._read_json(path, PreferenceFile)
        return DiscretePreference.ingest(data.spvs, data.probs)

    def load_preference_spec(self, path) -> PreferenceSpec:
        data = self._read_json(path, PreferenceSpecFile)
        if data.kind == "uniform":
            return PreferenceSpec.uniform(data.n)
        if data.kind == "dirichlet":
            if data.alpha is None:
                raise ConfigError("dirichlet preference file needs alpha")
            return PreferenceSpec.dirichlet(data.alpha)
        return PreferenceSpec.radial(data.n, data.center)

    def save_preference_spec(self, spec: PreferenceSpec, path) -> Path:
        if spec.kind == "custom":
            raise ConfigError("custom densities cannot be written to a file")
        return self._write_json(PreferenceSpecFile(
            kind=spec.kind, n=spec.n,
            alpha=None if spec.alpha is None else list(spec.alpha),
            center=None if spec.center is None else list(spec.center),
        ), path)

    def load_joint(self, path) -> JointPreference:
        """Dense CSV matrix, or a JSON file with F or (j, alpha)."""
        source = self.resolve(path)
        if source.suffix.lower() == ".csv":
            try:
                return JointPreference.ingest(np.loadtxt(source, delimiter=",", ndmin=2))
            except EdgeCodingError:
                raise
            except (OSError, ValueError) as e:
                raise ConfigError(f"cannot read joint preference {source}: {e}") from e
        data = self._read_json(path, JointPreferenceFile)
        if data.F is not None:
            return JointPreference.ingest(data.F)
        return joint_pref_alpha(data.j, data.alpha)

    def save_joint(self, joint: JointPreference, path) -> Path:
        target = self.resolve(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            for row in joint.F:
                writer.writerow([repr(float(v)) for v in row])
        return target

    # ─── Designs ───────────────────────────────────────────────────

    def save_codebooks(self, codebooks: CodebookSet, path) -> Path:
        return self._write_json(CodebookSetFile(n=codebooks.n, codebooks=_rows(codebooks.matrix)), path)

    def load_codebooks(self, path) -> CodebookSet:
        """Codebooks of a codebook-set or design-result file."""
        data = self._read_json(path, CodebookSetFile)
        return CodebookSet(np.array(data.codebooks, dtype=float))

    def save_design(self, result: DesignResult, path, seed: int | None = None,
                    restarts: int | None = None, expected_bits: float | None = None,
                    L: int | None = None) -> Path:
        return self._write_json(DesignResultFile(
            method=result.method, n=result.n, k=result.k,
            codebooks=_rows(result.codebooks.matrix),
            assignment=[int(o) for o in result.assignment.owner],
            objective_bits_per_symbol=float(result.objective), iterations=result.iterations,
            trace=[float(v) for v in result.trace],
            seed=seed, restarts=restarts, expected_bits=expected_bits, symbols_per_item=L,
        ), path)

    def load_design(self, path) -> DesignResultFile:
        return self._read_json(path, DesignResultFile)

    def save_twouser(self, result: TwoUserResult, path) -> Path:
        design = result.design
        return self._write_json(TwoUserDesignFile(
            n=design.n, k0=design.k0,
            common=_rows(design.common), excl1=_rows(design.excl1), excl2=_rows(design.excl2),
            objective_bits=float(result.objective), expected_bits=float(result.bits),
            method=result.method,
            costs_by_k0={str(k): float(v) for k, v in sorted(result.costs_by_k0.items())},
        ), path)

    def load_twouser(self, path) -> TwoUserDesign:
        data = self._read_json(path, TwoUserDesignFile)
        n = data.n
        return TwoUserDesign(
            np.array(data.common, dtype=float).reshape(-1, n),
            np.array(data.excl1, dtype=float).reshape(-1, n),
            np.array(data.excl2, dtype=float).reshape(-1, n),
        )

    # ─── Samples and items ─────────────────────────────────────────

    def export_samples(self, sample: SampleSet, path) -> Path:
        target = self.resolve(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow([f"p{n + 1}" for n in range(sample.points.shape[1])])
            for row in sample.points:
                writer.writerow([repr(float(v)) for v in row])
        return target

    def read_item(self, path, raw: bool = False) -> ItemSpec:
        """Whitespace-separated symbol indices, or raw bytes (N=256) with raw=True."""
        source = self.resolve(path)
        try:
            if raw:
                return ItemSpec(np.frombuffer(source.read_bytes(), dtype=np.uint8).astype(np.int64))
            tokens = source.read_text(encoding="utf-8").split()
            return ItemSpec([int(t) for t in tokens])
        except FileNotFoundError as e:
            raise ConfigError(f"file not found: {source}", path=str(source)) from e
        except EdgeCodingError:
            raise
        except ValueError as e:
            raise ConfigError(f"{source} is not a list of symbol indices") from e

    def write_item(self, item: ItemSpec, path, raw: bool = False) -> Path:
        target = self.resolve(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        if raw:
            item.check_alphabet(RAW_ALPHABET)
            target.write_bytes(item.symbols.astype(np.uint8).tobytes())
        else:
            target.write_text(" ".join(str(int(s)) for s in item.symbols) + "\n", encoding="utf-8")
        return target

    def write_bytes(self, data: bytes, path) -> Path:
        target = self.resolve(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
        return target

    def read_bytes(self, path) -> bytes:
        source = self.resolve(path)
        try:
            return source.read_bytes()
        except FileNotFoundError as e:
            raise ConfigError(f"file not found: {source}", path=str(source)) from e
