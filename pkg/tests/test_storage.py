"""Snapshot binary format, energy CSV and slice exports."""

import numpy as np
import pytest

from tornsim import (
    EnergyTrace,
    GridSpec,
    VectorField,
    energy,
    read_energy_csv,
    read_snapshot,
    write_energy_csv,
    write_snapshot,
)
from tornsim.storage import (
    SnapshotMagicError,
    SnapshotTruncatedError,
    SnapshotVersionError,
    export_slice,
    format_float,
)

from conftest import random_field


class TestSnapshotRoundTrip:
    def test_zero_field(self, toy_grid, tmp_path):
        path = tmp_path / "zero.torn"
        write_snapshot(VectorField.zeros(toy_grid), 0.25, path)
        v, t = read_snapshot(path)
        assert t == 0.25
        assert v.grid == toy_grid
        assert not v.data.any()

    def test_random_field_bit_exact(self, skew_grid, rng, tmp_path):
        path = tmp_path / "rand.torn"
        v0 = random_field(skew_grid, rng)
        write_snapshot(v0, 0.0421, path)
        v, t = read_snapshot(path)
        assert t == 0.0421
        assert np.array_equal(v.data, v0.data)
        # write the reread field again: files must be byte-identical
        path2 = tmp_path / "rand2.torn"
        write_snapshot(v, t, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_file_size_formula(self, toy_grid, tmp_path):
        path = tmp_path / "size.torn"
        write_snapshot(VectorField.zeros(toy_grid), 0.0, path)
        nx, ny, nz = toy_grid.shape
        assert path.stat().st_size == 4 + 4 + 12 + 8 * (1 + 3 + 1) + 8 * 3 * nx * ny * nz

    def test_bad_magic(self, toy_grid, tmp_path):
        path = tmp_path / "bad.torn"
        write_snapshot(VectorField.zeros(toy_grid), 0.0, path)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"XXXX"
        path.write_bytes(bytes(raw))
        with pytest.raises(SnapshotMagicError):
            read_snapshot(path)

    def test_bad_version(self, toy_grid, tmp_path):
        path = tmp_path / "ver.torn"
        write_snapshot(VectorField.zeros(toy_grid), 0.0, path)
        raw = bytearray(path.read_bytes())
        raw[4] = 99
        path.write_bytes(bytes(raw))
        with pytest.raises(SnapshotVersionError):
            read_snapshot(path)

    def test_truncated(self, toy_grid, tmp_path):
        path = tmp_path / "trunc.torn"
        write_snapshot(VectorField.zeros(toy_grid), 0.0, path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) - 17])
        with pytest.raises(SnapshotTruncatedError):
            read_snapshot(path)
        path.write_bytes(raw[:10])
        with pytest.raises(SnapshotTruncatedError):
            read_snapshot(path)

    def test_z_fastest_layout(self, tmp_path):
        # Bump vz at (0, 0, 1): it must land 8 bytes after the (0,0,0) value
        # of the third component block.
        g = GridSpec(2, 2, 2, 1.0, (0.0, 0.0, 1.0))
        v = VectorField.zeros(g)
        v.data[2, 0, 0, 1] = 7.0
        path = tmp_path / "layout.torn"
        write_snapshot(v, 0.0, path)
        raw = path.read_bytes()
        header = 60
        comp3 = header + 2 * 8 * 8  # two components of 8 values each
        vals = np.frombuffer(raw[comp3:comp3 + 2 * 8], dtype="<f8")
        assert list(vals) == [0.0, 7.0]


class TestFormatFloat:
    @pytest.mark.parametrize(
        "x,expected",
        [(0.0, "0"), (1.0, "1"), (-2.0, "-2"), (0.047, "0.047"), (1e-05, "1e-05")],
    )
    def test_canonical(self, x, expected):
        assert format_float(x) == expected

    def test_round_trip_is_value_exact(self, rng):
        for x in rng.standard_normal(200) * 10.0 ** rng.integers(-12, 12, 200):
            assert float(format_float(x)) == x


class TestEnergyCsv:
    def test_empty_trace(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_energy_csv(EnergyTrace(), path)
        assert path.read_text() == "t,energy,mynorm\n"
        assert len(read_energy_csv(path)) == 0

    def test_unit_row(self, tmp_path):
        tr = EnergyTrace()
        tr.append(0.0, 1.0)
        path = tmp_path / "one.csv"
        write_energy_csv(tr, path)
        assert path.read_text() == "t,energy,mynorm\n0,1,1\n"

    def test_round_trip_value_exact(self, rng, tmp_path):
        tr = EnergyTrace()
        t = 0.0
        for _ in range(1000):
            t += float(rng.uniform(1e-6, 1e-3))
            tr.append(t, float(rng.uniform(0, 1e4)))
        path = tmp_path / "big.csv"
        write_energy_csv(tr, path)
        back = read_energy_csv(path)
        assert len(back) == 1000
        assert np.array_equal(back.ts, tr.ts)
        assert np.array_equal(back.energies, tr.energies)
        assert np.array_equal(back.mynorms, tr.mynorms)

    def test_malformed_row_reports_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,energy,mynorm\n0,1,1\n0.1,oops,1\n")
        with pytest.raises(ValueError, match="row 3"):
            read_energy_csv(path)

    def test_wrong_header_rejected(self, tmp_path):
        path = tmp_path / "hdr.csv"
        path.write_text("time,E\n")
        with pytest.raises(ValueError, match="row 1"):
            read_energy_csv(path)


class TestExportSlice:
    def test_zero_field_zero_matrix(self, toy_grid, tmp_path):
        base, logp, coords = export_slice(
            VectorField.zeros(toy_grid), "z", index=3, path=tmp_path / "s.csv"
        )
        mat = np.loadtxt(base, delimiter=",")
        assert mat.shape == (toy_grid.nx, toy_grid.ny)
        assert not mat.any()
        assert logp.exists() and coords.exists()

    def test_slice_dims_match_grid(self, skew_grid, rng, tmp_path):
        v = random_field(skew_grid, rng)
        base, _, _ = export_slice(v, "x", index=0, path=tmp_path / "x.csv")
        mat = np.loadtxt(base, delimiter=",")
        assert mat.shape == (skew_grid.ny, skew_grid.nz)

    def test_range_aggregation_consistent_with_energy(self, toy_grid, rng, tmp_path):
        v = random_field(toy_grid, rng)
        base, _, _ = export_slice(
            v, "z", span=(0, toy_grid.nz - 1), path=tmp_path / "agg.csv"
        )
        mat = np.loadtxt(base, delimiter=",")
        # sum over x,y of the squared aggregate times h^2 recovers the energy
        assert toy_grid.h**2 * float((mat**2).sum()) == pytest.approx(
            energy(v), rel=1e-12
        )

    def test_log_companion(self, toy_grid, tmp_path):
        v = VectorField.zeros(toy_grid)
        v.data[0, :, :, 2] = 100.0
        _, logp, _ = export_slice(v, "z", index=2, path=tmp_path / "l.csv")
        logmat = np.loadtxt(logp, delimiter=",")
        assert logmat.max() == pytest.approx(2.0)

    def test_out_of_range_selector(self, toy_grid, tmp_path):
        with pytest.raises(ValueError, match="outside"):
            export_slice(VectorField.zeros(toy_grid), "z", index=99, path=tmp_path / "o.csv")

    def test_selector_exclusivity(self, toy_grid, tmp_path):
        with pytest.raises(ValueError, match="exactly one"):
            export_slice(VectorField.zeros(toy_grid), "z", index=1, span=(0, 1),
                         path=tmp_path / "b.csv")
