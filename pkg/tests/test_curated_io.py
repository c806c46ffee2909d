import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commtrace.curated import (
    CuratedComm,
    CuratedTrace,
    UcpLink,
    UcpPairRec,
    read_curated,
    write_curated,
)
from commtrace.errors import InvariantViolation, VersionMismatch
from commtrace.records import ProcessMeta, UcpOp


def test_empty_trace_roundtrip():
    trace = CuratedTrace()
    data = write_curated(trace)
    back = read_curated(data)
    assert back.comms == [] and back.processes == [] and back.topology is None
    assert write_curated(back) == data


def test_version_mismatch():
    doc = json.loads(write_curated(CuratedTrace()))
    doc["schema_version"] = 0
    with pytest.raises(VersionMismatch) as err:
        read_curated(json.dumps(doc))
    assert err.value.found == 0 and err.value.expected == 1


def test_nic_fields_tied_to_transport():
    base = dict(
        proc="n0.p0", seq=0, family="am", mode="short", ep_id=1, length=4,
        local_buf=None, remote_buf=None, am_id=2, completion_slot=None,
        t_start=1, t_complete=2, callstack=("main",),
        src_proc="n0.p0", dst_proc="n0.p1",
        src_endpoint_kind="host", dst_endpoint_kind="host",
        src_gpu=None, dst_gpu=None, mpi_fn=None, ucp_link=None,
    )
    with pytest.raises(InvariantViolation):
        CuratedComm(**base, src_nic="mlx5_0", dst_nic="mlx5_0", transport="sysv")
    with pytest.raises(InvariantViolation):
        CuratedComm(**base, src_nic=None, dst_nic=None, transport="rc_mlx5")
    CuratedComm(**base, src_nic="mlx5_0", dst_nic="mlx5_1", transport="rc_mlx5")


def test_gpu_fields_tied_to_endpoint_kind():
    base = dict(
        proc="n0.p0", seq=0, family="get", mode="zcopy", ep_id=1, length=4,
        local_buf=0x10, remote_buf=0x20, am_id=None, completion_slot=1,
        t_start=1, t_complete=2, callstack=(),
        src_proc="n0.p0", dst_proc="n0.p1",
        src_nic=None, dst_nic=None, mpi_fn="MPI_Isend", ucp_link=None,
        transport="cuda_ipc",
    )
    with pytest.raises(InvariantViolation):
        CuratedComm(
            **base, src_endpoint_kind="gpu", dst_endpoint_kind="host",
            src_gpu=None, dst_gpu=None,
        )
    CuratedComm(
        **base, src_endpoint_kind="gpu", dst_endpoint_kind="gpu", src_gpu=0, dst_gpu=1
    )


procs = st.sampled_from(["n0.p0", "n0.p1", "n1.p2", "n1.p3"])
times = st.integers(0, 10**12)


@st.composite
def curated_comms(draw):
    family = draw(st.sampled_from(["am", "put", "get"]))
    mode = draw(st.sampled_from(["short", "bcopy", "zcopy"]))
    needs_bufs = family in ("put", "get") and mode in ("short", "zcopy")
    transport = draw(st.sampled_from(["rc_mlx5", "sysv", "cuda_ipc", "gdr_copy"]))
    nic = transport == "rc_mlx5"
    src_gpu = draw(st.none() | st.integers(0, 3))
    dst_gpu = draw(st.none() | st.integers(0, 3))
    t0 = draw(times)
    link = draw(
        st.none()
        | st.builds(
            UcpLink,
            send_proc=procs, send_seq=st.integers(0, 99),
            recv_proc=procs, recv_seq=st.integers(0, 99),
        )
    )
    return CuratedComm(
        proc=draw(procs),
        seq=draw(st.integers(0, 10**6)),
        family=family,
        mode=mode,
        ep_id=draw(st.integers(0, 999)),
        length=draw(st.integers(0, 1 << 24)),
        local_buf=draw(st.integers(0, 2**48)) if needs_bufs else None,
        remote_buf=draw(st.integers(0, 2**48)) if needs_bufs else None,
        am_id=draw(st.integers(0, 3)) if family == "am" else None,
        completion_slot=draw(st.integers(1, 128)) if mode == "zcopy" else None,
        t_start=t0,
        t_complete=draw(st.none() | st.integers(t0, t0 + 10**6)),
        callstack=tuple(draw(st.lists(st.sampled_from(["f", "MPI_Isend", "main"]), max_size=3))),
        src_proc=draw(procs),
        dst_proc=draw(procs),
        src_endpoint_kind="gpu" if src_gpu is not None else "host",
        dst_endpoint_kind="gpu" if dst_gpu is not None else "host",
        src_gpu=src_gpu,
        dst_gpu=dst_gpu,
        src_nic="mlx5_0" if nic else None,
        dst_nic="mlx5_1" if nic else None,
        mpi_fn=draw(st.none() | st.sampled_from(["MPI_Isend", "MPI_Allreduce"])),
        ucp_link=link,
        transport=transport,
    )


@st.composite
def ucp_pairs(draw):
    t0 = draw(times)
    send = UcpOp(
        seq=draw(st.integers(0, 999)), dir="send", tag=draw(st.integers(0, 2**64 - 1)),
        buffer=draw(st.integers(0, 2**48)), length=draw(st.integers(0, 1 << 24)),
        ucp_ep_id=1, managed_uct_eps=tuple(draw(st.lists(st.integers(0, 9), max_size=3))),
        peer_proc_id=draw(procs), t_start=t0, t_end=t0 + 100, callstack=("MPI_Isend",),
    )
    t1 = draw(times)
    recv = UcpOp(
        seq=draw(st.integers(0, 999)), dir="recv", tag=send.tag,
        buffer=draw(st.integers(0, 2**48)), length=send.length,
        ucp_ep_id=None, managed_uct_eps=None,
        peer_proc_id=draw(procs), t_start=t1, t_end=t1 + 100, callstack=("MPI_Irecv",),
    )
    return UcpPairRec(send_proc=draw(procs), send=send, recv_proc=draw(procs), recv=recv)


@st.composite
def curated_traces(draw):
    metas = [
        ProcessMeta("n0.p0", 0, "n0", 1),
        ProcessMeta("n0.p1", 1, "n0", 2),
        ProcessMeta("n1.p2", 2, "n1", 3),
        ProcessMeta("n1.p3", 3, "n1", 4),
    ]
    return CuratedTrace(
        topology=None,
        processes=metas,
        comms=draw(st.lists(curated_comms(), max_size=6)),
        ucp_pairs=draw(st.lists(ucp_pairs(), max_size=4)),
    )


@settings(max_examples=80, deadline=None)
@given(curated_traces())
def test_curated_roundtrip_property(trace):
    data = write_curated(trace)
    back = read_curated(data)
    assert back.processes == trace.processes
    assert back.comms == trace.comms
    assert back.ucp_pairs == trace.ucp_pairs
    assert write_curated(back) == data
