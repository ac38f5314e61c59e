import numpy as np
import pytest

from threatgen.aml import (
    IN,
    OUT,
    FlowTensor,
    TensorizeError,
    TransactionRecord,
    load_flow_tensors,
    read_transactions_csv,
    save_flow_tensors,
    tensorize,
    write_transactions_csv,
)


def test_record_validation():
    with pytest.raises(ValueError):
        TransactionRecord("a", "b", 0.0, 0.0)
    with pytest.raises(ValueError):
        TransactionRecord("a", "a", 1.0, 0.0)


def test_flow_tensor_validation_and_counts():
    with pytest.raises(ValueError):
        FlowTensor(np.zeros((3, 1, 1, 1)))
    with pytest.raises(ValueError):
        FlowTensor(-np.ones((2, 1, 1, 1)))
    t = FlowTensor(np.array([[[[0.0, 2.5]]], [[[3.0, 0.0]]]]))
    assert t.counts.tolist() == [[[[0.0, 1.0]]], [[[1.0, 0.0]]]]
    assert t.total() == pytest.approx(5.5)


def test_tensorize_placement_oracle():
    # internal accounts sorted by id: A -> row 0, B -> row 1;
    # externals in first-seen order: X -> col 0, Y -> col 1
    records = [
        TransactionRecord("X", "A", 5.0, 0.0),
        TransactionRecord("X", "A", 2.0, 3.0),    # same window as the first
        TransactionRecord("A", "Y", 7.0, 15.0),   # window 1
        TransactionRecord("X", "B", 2.0, 3.0),
    ]
    t = tensorize(records, ["B", "A"], window=10.0, M=2, E=2, T=3)
    expected = np.zeros((2, 2, 2, 3))
    expected[IN, 0, 0, 0] = 7.0
    expected[OUT, 0, 1, 1] = 7.0
    expected[IN, 1, 0, 0] = 2.0
    np.testing.assert_array_equal(t.amounts, expected)
    assert t.window_length == 10.0


def test_tensorize_conserves_total_mass():
    rng = np.random.default_rng(0)
    internal = [f"i{k}" for k in range(4)]
    external = [f"e{k}" for k in range(6)]
    records = []
    for _ in range(200):
        i = internal[rng.integers(4)]
        e = external[rng.integers(6)]
        src, dst = (i, e) if rng.random() < 0.5 else (e, i)
        records.append(TransactionRecord(src, dst, float(rng.lognormal(2, 1)),
                                         float(rng.uniform(0, 100))))
    t = tensorize(records, internal, window=10.0, M=4, E=6, T=10)
    total = 0.0
    for r in records:  # same order, same 64-bit accumulation
        total += r.amount
    assert t.total() == total


def test_tensorize_error_cases():
    with pytest.raises(TensorizeError):  # both endpoints internal
        tensorize([TransactionRecord("a", "b", 1.0, 0.0)], ["a", "b"], 10.0, 2, 1, 1)
    with pytest.raises(TensorizeError):  # neither endpoint internal
        tensorize([TransactionRecord("x", "y", 1.0, 0.0)], ["a"], 10.0, 1, 2, 1)
    with pytest.raises(TensorizeError):  # external slots overflow
        tensorize([TransactionRecord("x", "a", 1.0, 0.0),
                   TransactionRecord("y", "a", 1.0, 0.0)], ["a"], 10.0, 1, 1, 1)
    with pytest.raises(TensorizeError):  # timestamp past the horizon
        tensorize([TransactionRecord("x", "a", 1.0, 50.0)], ["a"], 10.0, 1, 1, 2, start=0.0)
    with pytest.raises(TensorizeError):  # more internal accounts than rows
        tensorize([], ["a", "b", "c"], 10.0, 2, 1, 1)


def test_tensorize_start_override():
    records = [TransactionRecord("x", "a", 1.0, 100.0)]
    t = tensorize(records, ["a"], window=10.0, M=1, E=1, T=2, start=95.0)
    assert t.amounts[IN, 0, 0, 0] == 1.0


def test_transactions_csv_roundtrip(tmp_path):
    records = [
        TransactionRecord("x", "a", 12.5, 1_700_000_000.0),
        TransactionRecord("a", "y", 0.07000000000000001, 1_700_000_060.0),
    ]
    path = tmp_path / "tx.csv"
    write_transactions_csv(path, records)
    assert read_transactions_csv(path) == records


def test_transactions_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("from,to,amt\nx,a,1\n")
    with pytest.raises(ValueError):
        read_transactions_csv(path)


def test_flow_container_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    # integer-valued amounts are exactly representable at float32
    tensors = [
        FlowTensor(rng.integers(0, 1000, size=(2, 3, 4, 8)).astype(float), window_length=3600.0),
        FlowTensor(np.zeros((2, 1, 2, 4)), window_length=60.0),
    ]
    path = tmp_path / "flows.bin"
    save_flow_tensors(path, tensors)
    loaded = load_flow_tensors(path)
    assert len(loaded) == 2
    for orig, back in zip(tensors, loaded):
        np.testing.assert_array_equal(orig.amounts, back.amounts)
        assert back.window_length == orig.window_length


def test_flow_container_rejects_garbage(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"not a container at all")
    with pytest.raises(ValueError):
        load_flow_tensors(path)
