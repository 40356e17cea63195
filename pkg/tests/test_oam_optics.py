import numpy as np
import pytest
from scipy import integrate

from oamsim.errors import DomainError
from oamsim.oam_optics import (
    MUB_LABELS,
    QUTRIT_MODES,
    FieldGrid,
    equal_amplitude_radius,
    lg_amplitude,
    mub_basis,
    phase_of,
    qutrit_tomo_states,
    read_pgm,
    superposition_intensity,
    superposition_phase_mask,
    write_intensity_pgm,
    write_phase_pgm,
    write_pgm,
)


def radial_norm_oracle(m, w0=1.0):
    """2 pi * int_0^inf |LG_m(r)|^2 r dr by adaptive quadrature."""
    f = lambda r: abs(lg_amplitude(m, r, 0.0, w0)) ** 2 * r
    val, _ = integrate.quad(f, 0, 20 * w0 * (1 + abs(m)) ** 0.5, limit=200)
    return 2 * np.pi * val


class TestLG:
    @pytest.mark.parametrize("m", [0, 1, -1, 3, -5, 7])
    def test_radial_quadrature_normalization(self, m):
        assert radial_norm_oracle(m) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("m", [0, 2, -3])
    def test_grid_normalization(self, m):
        grid = FieldGrid(size=512, extent=5.0)
        total = np.sum(np.abs(grid.field(m)) ** 2) * grid.pixel_area
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_orthogonality_on_grid(self):
        grid = FieldGrid(size=512, extent=5.0)
        overlap = np.sum(grid.field(2).conj() * grid.field(-2)) * grid.pixel_area
        assert abs(overlap) < 1e-3

    def test_azimuthal_phase(self):
        a = lg_amplitude(3, 1.0, 0.0)
        b = lg_amplitude(3, 1.0, 0.4)
        assert np.angle(b / a) == pytest.approx(1.2)

    def test_zero_field_at_origin_for_nonzero_m(self):
        assert lg_amplitude(2, 0.0, 0.3) == 0
        assert abs(lg_amplitude(0, 0.0, 0.0)) == pytest.approx(np.sqrt(2 / np.pi))

    def test_invalid_inputs(self):
        with pytest.raises(DomainError):
            lg_amplitude(1, 1.0, 0.0, w0=0.0)
        with pytest.raises(DomainError):
            lg_amplitude(1, -1.0, 0.0)
        with pytest.raises(DomainError):
            FieldGrid(size=1)


class TestPhaseMask:
    def test_range_and_shape(self):
        phase, flagged = superposition_phase_mask(2, -1, 0.7, FieldGrid(size=64))
        assert phase.shape == (64, 64)
        assert phase.min() >= 0 and phase.max() < 2 * np.pi
        assert not flagged.any()

    def test_equal_zero_modes_give_constant_phase(self):
        theta = 1.1
        phase, _ = superposition_phase_mask(0, 0, theta, FieldGrid(size=32))
        np.testing.assert_allclose(phase, theta / 2, atol=1e-12)

    def test_opposite_unit_modes_give_binary_phase(self):
        # LG_1 + LG_-1 is 2 a(r) cos(phi): the phase is 0 or pi everywhere
        phase, flagged = superposition_phase_mask(1, -1, 0.0, FieldGrid(size=64))
        values = phase[~flagged]
        assert np.all(np.isclose(values, 0.0, atol=1e-9) | np.isclose(values, np.pi, atol=1e-9))
        assert np.isclose(values, np.pi, atol=1e-9).any()

    def test_global_phase_shifts_mask_uniformly(self):
        # multiplying both amplitudes by a common factor c offsets the phase by arg(c)
        grid = FieldGrid(size=128)
        c = 0.8 * np.exp(0.9j)
        f = grid.field(3) + np.exp(0.3j) * grid.field(-2)
        p1, _ = phase_of(f)
        p2, _ = phase_of(c * f)
        diff = np.angle(np.exp(1j * (p2 - p1)))
        np.testing.assert_allclose(diff, np.angle(c), atol=1e-9)

    def test_branch_cuts_on_equal_amplitude_circle(self):
        # on |LG_5| == |LG_-1| the field is 2 a exp(2i phi) cos(3 phi): it vanishes at
        # six azimuths and the phase jumps by pi at each, on top of smooth winding
        m1, m2 = 5, -1
        r = equal_amplitude_radius(m1, m2)
        assert r == pytest.approx(120 ** (1 / 8) / np.sqrt(2))
        assert abs(lg_amplitude(m1, r, 0.0)) == pytest.approx(abs(lg_amplitude(m2, r, 0.0)))
        phi = np.linspace(0, 2 * np.pi, 4000, endpoint=False) + 1e-3
        f = lg_amplitude(m1, r, phi) + lg_amplitude(m2, r, phi)
        phase, _ = phase_of(f)
        step = np.angle(np.exp(1j * np.diff(np.append(phase, phase[0]))))
        assert int(np.sum(np.abs(step) > np.pi / 2)) == abs(m1 - m2)

    def test_winding_far_from_circle_follows_dominant_mode(self):
        # outside the circle LG_5 dominates; the phase winds 5 times
        phi = np.linspace(0, 2 * np.pi, 4000, endpoint=False) + 1e-3
        f = lg_amplitude(5, 3.0, phi) + lg_amplitude(-1, 3.0, phi)
        unwrapped = np.unwrap(np.angle(np.append(f, f[0])))
        assert round((unwrapped[-1] - unwrapped[0]) / (2 * np.pi)) == 5

    def test_intensity_normalized(self):
        inten = superposition_intensity(1, -1, 0.0, FieldGrid(size=64))
        assert inten.max() == pytest.approx(1.0)
        assert inten.min() >= 0

    def test_equal_amplitude_radius_rejects_equal_magnitude(self):
        with pytest.raises(DomainError):
            equal_amplitude_radius(2, -2)

    def test_equal_amplitude_radius_general(self):
        for m1, m2 in [(3, 0), (1, 4), (-2, 6)]:
            r = equal_amplitude_radius(m1, m2, w0=1.7)
            assert abs(lg_amplitude(m1, r, 0, 1.7)) == pytest.approx(abs(lg_amplitude(m2, r, 0, 1.7)), rel=1e-10)


class TestPGM:
    def test_round_trip(self, tmp_path):
        values = ((np.arange(256) + 0.5) * 2 * np.pi / 256).reshape(16, 16)
        write_phase_pgm(tmp_path / "p.pgm", values)
        levels = read_pgm(tmp_path / "p.pgm")
        assert levels.shape == (16, 16)
        np.testing.assert_array_equal(levels.ravel(), np.arange(256))

    def test_header_and_clip(self, tmp_path):
        write_pgm(tmp_path / "a.pgm", np.array([[0.0, 1.0], [-1.0, 5.0]]), 1.0)
        raw = (tmp_path / "a.pgm").read_bytes()
        assert raw.startswith(b"P5\n2 2\n255\n")
        np.testing.assert_array_equal(read_pgm(tmp_path / "a.pgm"), [[0, 255], [0, 255]])

    def test_intensity_peak_maps_to_255(self, tmp_path):
        write_intensity_pgm(tmp_path / "i.pgm", np.array([[0.0, 2.0], [1.0, 0.5]]))
        np.testing.assert_array_equal(read_pgm(tmp_path / "i.pgm"), [[0, 255], [128, 64]])

    def test_leading_whitespace_valued_pixels_survive(self, tmp_path):
        # pixel bytes 9..13 and 32 are whitespace to a naive tokenizer
        levels = np.array([[9, 10, 32, 13]], dtype=float)
        write_pgm(tmp_path / "w.pgm", levels, 256.0)
        np.testing.assert_array_equal(read_pgm(tmp_path / "w.pgm"), levels)

    def test_reject_ascii_pgm(self, tmp_path):
        (tmp_path / "x.pgm").write_bytes(b"P2\n1 1\n255\n0\n")
        with pytest.raises(DomainError):
            read_pgm(tmp_path / "x.pgm")


class TestBases:
    @pytest.mark.parametrize("label", MUB_LABELS)
    def test_orthonormal(self, label):
        s = mub_basis((2, -3), label).states
        np.testing.assert_allclose(s @ s.conj().T, np.eye(2), atol=1e-15)

    def test_mutually_unbiased(self):
        for a in MUB_LABELS:
            for b in MUB_LABELS:
                if a == b:
                    continue
                overlaps = np.abs(mub_basis((0, 1), a).states.conj() @ mub_basis((0, 1), b).states.T) ** 2
                np.testing.assert_allclose(overlaps, 0.5, atol=1e-15)

    def test_embedding(self):
        e = mub_basis((1, -1), "x").embedded([-1, 0, 1])
        np.testing.assert_allclose(e[0], np.array([1, 0, 1]) / np.sqrt(2))
        np.testing.assert_allclose(e[1], np.array([-1, 0, 1]) / np.sqrt(2))

    def test_invalid(self):
        with pytest.raises(DomainError):
            mub_basis((2, 2), "x")
        with pytest.raises(DomainError):
            mub_basis((0, 1), "w")

    def test_qutrit_states(self):
        states = qutrit_tomo_states()
        assert len(states) == 9 and QUTRIT_MODES == (-1, 0, 1)
        for s in states:
            assert np.linalg.norm(s) == pytest.approx(1.0)
        # product projectors span the full 81-dimensional operator space
        single = [np.outer(s, s.conj()) for s in states]
        vecs = np.array([np.kron(a, b).ravel() for a in single for b in single])
        assert np.linalg.matrix_rank(vecs) == 81
