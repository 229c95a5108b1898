import numpy as np
import pytest

from oracles import brute_window_features
from roadsense.errors import InvalidConfig, LogTooShort, MalformedRow, TooFewSamples
from roadsense.telemetry import AZ, DriveLog, PotholeEvents, SynthConfig, synth_drive
from roadsense.windows import (
    FEATURE_NAMES,
    N_FEATURES,
    Scaler,
    apply_scaler,
    attach_condition_label,
    attach_pothole_labels,
    attach_regime_labels,
    extract_features,
    feature_matrix,
    fit_scaler,
    format_feature_csv,
    make_windows,
    parse_feature_csv,
    window_labels,
)


def flat_log(n, rate=5.0, t0=0.0):
    data = np.zeros((n, 10))
    data[:, 0] = t0 + np.arange(n) / rate
    data[:, AZ] = 1.0
    data[:, 7] = 40.0
    data[:, 8] = -80.0
    data[:, 9] = 5.0
    return DriveLog(data)


def feature(vec, name):
    return vec[FEATURE_NAMES.index(name)]


def test_canonical_names():
    assert N_FEATURES == 26
    assert FEATURE_NAMES[0] == "mean_ax" and FEATURE_NAMES[6] == "mean_speed"
    assert FEATURE_NAMES[13] == "std_speed" and FEATURE_NAMES[-1] == "min_gz"


@pytest.mark.parametrize("n, size, expected", [(21300, 25, 852), (21300, 10, 2130), (25, 25, 1), (51, 25, 2)])
def test_window_counts(n, size, expected):
    windows = make_windows(flat_log(n), size)
    assert len(windows) == expected == n // size
    assert all(w.sample_count == size for w in windows)


def test_too_short_and_bad_size():
    with pytest.raises(LogTooShort):
        make_windows(flat_log(24), 25)
    with pytest.raises(InvalidConfig):
        make_windows(flat_log(24), 1)


def test_contiguous_windows_share_edges():
    windows = make_windows(flat_log(100), 10)
    for a, b in zip(windows, windows[1:]):
        assert a.end_t == b.start_t
    assert windows[-1].end_t == pytest.approx(windows[-1].start_t + 2.0)


def test_constant_window():
    f = extract_features(flat_log(10).data)
    assert feature(f, "mean_az") == 1 and feature(f, "std_az") == 0
    assert feature(f, "max_az") == feature(f, "min_az") == 1
    assert feature(f, "mean_speed") == 5 and feature(f, "std_speed") == 0
    for ax in ("gx", "gy", "gz"):
        for stat in ("mean", "std", "max", "min"):
            assert feature(f, f"{stat}_{ax}") == 0


def test_three_value_population_std():
    data = np.zeros((3, 10))
    data[:, 1] = [1.0, 2.0, 3.0]
    f = extract_features(data)
    assert feature(f, "mean_ax") == 2.0
    assert feature(f, "std_ax") == pytest.approx(0.81650, abs=1e-5)
    assert feature(f, "max_ax") == 3.0 and feature(f, "min_ax") == 1.0


def test_too_few_samples():
    with pytest.raises(TooFewSamples):
        extract_features(np.zeros((1, 10)))


def test_matches_brute_force_on_1000_runs():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(2, 30))
        rows = rng.normal(0, rng.uniform(0.01, 5), size=(n, 10))
        fast = extract_features(rows)
        slow = np.array(brute_window_features(rows.tolist()))
        mx = slice(14, 26)
        assert (fast[mx] == slow[mx]).all()
        np.testing.assert_allclose(fast[:14], slow[:14], rtol=1e-12, atol=1e-14)
        means, maxs, mins = fast[0:6], fast[14:20], fast[20:26]
        assert (mins <= means + 1e-12).all() and (means <= maxs + 1e-12).all()


def test_windowed_features_equal_per_window_extract():
    log, _, _ = synth_drive(SynthConfig(duration_s=30, rng_seed=2))
    windows = make_windows(log, 25)
    for i, w in enumerate(windows):
        np.testing.assert_array_equal(w.features, extract_features(log.data[25 * i : 25 * (i + 1)]))


def test_condition_label():
    windows = make_windows(flat_log(21300), 25)
    labeled = attach_condition_label(windows, 1)
    assert len(labeled) == 852 and window_labels(labeled).sum() == 852
    assert attach_condition_label([], 1) == []
    assert window_labels(attach_condition_label(labeled, 0)).sum() == 0
    with pytest.raises(InvalidConfig):
        attach_condition_label(windows, 2)


def test_pothole_membership_half_open():
    windows = make_windows(flat_log(50), 10)
    labeled, unmatched = attach_pothole_labels(windows, PotholeEvents((3.1,)))
    assert unmatched == 0
    assert [w.label for w in labeled] == [0, 1, 0, 0, 0]
    assert (labeled[1].start_t, labeled[1].end_t) == (2.0, 4.0)
    labeled, _ = attach_pothole_labels(windows, PotholeEvents((4.0,)))
    assert [w.label for w in labeled] == [0, 0, 1, 0, 0]
    labeled, unmatched = attach_pothole_labels(windows, PotholeEvents(()))
    assert unmatched == 0 and all(w.label == 0 for w in labeled)


def test_unmatched_events_counted():
    windows = make_windows(flat_log(50), 10)
    labeled, unmatched = attach_pothole_labels(windows, PotholeEvents((-1.0, 10.0, 55.0, 5.0, 5.1)))
    assert unmatched == 3
    assert sum(w.label for w in labeled) == 1


def brute_membership(windows, events):
    return [int(any(w.start_t <= e < w.end_t for e in events)) for w in windows]


def test_96_events_96_positive_windows():
    windows = make_windows(flat_log(21300), 10)
    rng = np.random.default_rng(96)
    chosen = np.sort(rng.choice(len(windows), size=96, replace=False))
    events = [windows[i].start_t + rng.uniform(0, 2.0) for i in chosen]
    labeled, unmatched = attach_pothole_labels(windows, PotholeEvents(tuple(events)))
    assert unmatched == 0
    labels = [w.label for w in labeled]
    assert sum(labels) == 96
    assert labels == brute_membership(windows, events)


def test_stitching_never_exceeds_event_count():
    rng = np.random.default_rng(5)
    windows = make_windows(flat_log(500), 10)
    for _ in range(50):
        events = tuple(rng.uniform(-5, 105, size=int(rng.integers(0, 40))))
        labeled, unmatched = attach_pothole_labels(windows, PotholeEvents(events))
        labels = [w.label for w in labeled]
        assert sum(labels) <= len(events)
        assert labels == brute_membership(windows, sorted(events))
        assert unmatched == sum(1 for e in events if not any(w.start_t <= e < w.end_t for w in windows))


def test_regime_labels_majority():
    windows = make_windows(flat_log(20), 10)
    regimes = np.array([0] * 6 + [1] * 4 + [0] * 5 + [1] * 5)
    assert [w.label for w in attach_regime_labels(windows, regimes)] == [0, 1]


def test_bad_regime_has_higher_std_az():
    log, _, regimes = synth_drive(SynthConfig(duration_s=600, segments=((60, "good"), (60, "bad")), rng_seed=9))
    windows = attach_regime_labels(make_windows(log, 25), regimes)
    X, y = feature_matrix(windows), window_labels(windows)
    j = FEATURE_NAMES.index("std_az")
    assert X[y == 1, j].mean() > X[y == 0, j].mean()


def test_scaler_examples():
    X = np.zeros((2, 26))
    X[1, 4] = 2.0
    s = fit_scaler(X)
    assert s.means[4] == 1.0 and s.stds[4] == 1.0
    assert (fit_scaler(np.ones((5, 26))).stds == 0).all()
    assert (apply_scaler(s, s.means) == 0).all()
    t = Scaler(np.full(26, 1.0), np.full(26, 2.0))
    assert apply_scaler(t, np.full(26, 5.0))[0] == 2.0
    z = Scaler(np.zeros(26), np.zeros(26))
    assert (apply_scaler(z, np.full(26, 7.0)) == 0).all()
    with pytest.raises(TooFewSamples):
        fit_scaler(np.zeros((1, 26)))


def test_scaler_idempotence():
    rng = np.random.default_rng(1)
    for _ in range(20):
        X = rng.normal(rng.uniform(-5, 5, 26), rng.uniform(0.1, 10, 26), size=(40, 26))
        Z = apply_scaler(fit_scaler(X), X)
        again = fit_scaler(Z)
        np.testing.assert_allclose(again.means, 0, atol=1e-9)
        np.testing.assert_allclose(again.stds, 1, atol=1e-9)


def test_scaler_dict_round_trip():
    s = fit_scaler(np.random.default_rng(0).normal(size=(10, 26)))
    back = Scaler.from_dict(s.to_dict())
    assert (back.means == s.means).all() and (back.stds == s.stds).all()


def test_feature_csv_round_trip():
    log, events, _ = synth_drive(SynthConfig(duration_s=60, pothole_count=3, rng_seed=4))
    windows, _ = attach_pothole_labels(make_windows(log, 10), events)
    text = format_feature_csv(windows)
    assert text.splitlines()[0].endswith("min_gz,label,start_t,end_t,lat,lon")
    table = parse_feature_csv(text)
    assert (table.X == feature_matrix(windows)).all()
    assert (table.labels == window_labels(windows)).all()
    assert table.start_t[3] == windows[3].start_t


def test_feature_csv_unlabeled_and_bad_header():
    windows = make_windows(flat_log(30), 10)
    assert parse_feature_csv(format_feature_csv(windows)).labels is None
    with pytest.raises(MalformedRow):
        parse_feature_csv("a,b\n")
