import pytest

from icsim import frame_codec as fc
from icsim import nodes as nd

SLAVE_ADDR = fc.Address(bytes([0x64, 0x49, 0x46, 0x68, 0x00, 0x53]))
OTHER_ADDR = fc.Address(bytes([0x89, 0x47, 0x46, 0x68, 0x00, 0x53]))


class TestTemperatureCodec:
    def test_lab_readings(self):
        assert nd.encode_temperature(19.7) == (0x13, 0x07)
        assert nd.encode_temperature(24.8) == (0x18, 0x08)
        assert nd.encode_temperature(0.0) == (0x00, 0x00)

    def test_decode_lab_reading(self):
        assert nd.decode_temperature((0x13, 0x07)) == pytest.approx(19.7)

    def test_decode_rejects_bad_digit(self):
        with pytest.raises(nd.InvalidDecimalDigit):
            nd.decode_temperature((0x00, 0x0A))

    def test_encode_rejects_out_of_range(self):
        for bad in (-0.1, 100.0, 250.0):
            with pytest.raises(nd.OutOfRange):
                nd.encode_temperature(bad)

    def test_exhaustive_round_trip(self):
        # all 1000 representable readings
        for tenths in range(1000):
            celsius = tenths / 10.0
            pair = nd.encode_temperature(celsius)
            assert nd.decode_temperature(pair) == pytest.approx(celsius)


def command_frame(target=SLAVE_ADDR):
    return fc.Frame(1, target, nd.COMMAND_PAYLOAD)


class TestSlave:
    def test_matching_command_wakes_and_replies(self):
        state = nd.SlaveState(address=SLAVE_ADDR)
        after, actions = nd.slave_step(state, nd.FrameReceived(command_frame()))
        assert after.phase == "TRANSMIT"
        assert after.power_mode == "RUN"
        kinds = [type(a) for a in actions]
        assert kinds == [nd.SetPowerMode, nd.SetGating, nd.TransmitFrame]
        assert actions[0] == nd.SetPowerMode("RUN", 7.8e-6)
        reply = actions[2].frame
        assert reply.relay_depth == 1
        assert reply.address == SLAVE_ADDR
        assert reply.payload == bytes([0x00, 0xFF])

    def test_sensor_mode_replies_with_temperature(self):
        state = nd.SlaveState(address=SLAVE_ADDR, mode="sensor", temperature_c=19.7)
        _, actions = nd.slave_step(state, nd.FrameReceived(command_frame()))
        reply = next(a for a in actions if isinstance(a, nd.TransmitFrame)).frame
        assert reply.payload == bytes([0x13, 0x07])
        assert reply.length == 2

    def test_non_matching_frame_is_ignored(self):
        state = nd.SlaveState(address=SLAVE_ADDR)
        after, actions = nd.slave_step(state, nd.FrameReceived(command_frame(OTHER_ADDR)))
        assert after == state
        assert actions == []

    def test_full_cycle_returns_to_initial_state(self):
        state = nd.SlaveState(address=SLAVE_ADDR, mode="sensor", temperature_c=21.5)
        mid, _ = nd.slave_step(state, nd.FrameReceived(command_frame()))
        final, actions = nd.slave_step(mid, nd.TxDone())
        assert final == state
        assert nd.SetPowerMode("STOP1", 0.0) in actions

    def test_unexpected_event_logged_not_crashed(self):
        state = nd.SlaveState(address=SLAVE_ADDR)
        after, actions = nd.slave_step(state, nd.TxDone())
        assert after == state
        assert len(actions) == 1 and isinstance(actions[0], nd.Log)

    def test_standby_requires_stop1(self):
        with pytest.raises(ValueError):
            nd.SlaveState(address=SLAVE_ADDR, phase="STANDBY", power_mode="RUN")


class TestMaster:
    def test_poll_emits_command_and_timer(self):
        state = nd.MasterState(timeout_s=0.01)
        after, actions = nd.master_step(state, nd.PollRequest(SLAVE_ADDR))
        assert after.phase == "AWAIT_REPLY"
        assert after.pending_target == SLAVE_ADDR
        tx = next(a for a in actions if isinstance(a, nd.TransmitFrame))
        assert fc.encode_frame(tx.frame).hex(" ") == "01 64 49 46 68 00 53 02 12 34 f7 75"
        assert nd.StartTimer(0.01) in actions

    def test_matching_reply_reports_payload(self):
        state = nd.MasterState(phase="AWAIT_REPLY", pending_target=SLAVE_ADDR)
        reply = fc.Frame(1, SLAVE_ADDR, bytes([0x00, 0xFF]))
        after, actions = nd.master_step(state, nd.FrameReceived(reply))
        assert after.phase == "IDLE"
        assert actions == [nd.Report(SLAVE_ADDR, bytes([0x00, 0xFF]))]

    def test_reply_from_wrong_address_ignored(self):
        state = nd.MasterState(phase="AWAIT_REPLY", pending_target=SLAVE_ADDR)
        reply = fc.Frame(1, OTHER_ADDR, bytes([0x00, 0xFF]))
        after, actions = nd.master_step(state, nd.FrameReceived(reply))
        assert after == state
        assert actions == []

    def test_timeout_reports_marker(self):
        state = nd.MasterState(phase="AWAIT_REPLY", pending_target=SLAVE_ADDR)
        after, actions = nd.master_step(state, nd.Timeout())
        assert after.phase == "IDLE"
        assert actions == [nd.Report(SLAVE_ADDR, None)]

    def test_at_most_one_outstanding_command(self):
        state = nd.MasterState(phase="AWAIT_REPLY", pending_target=SLAVE_ADDR)
        after, actions = nd.master_step(state, nd.PollRequest(OTHER_ADDR))
        assert after == state
        assert len(actions) == 1 and isinstance(actions[0], nd.Log)

    def test_await_reply_requires_target(self):
        with pytest.raises(ValueError):
            nd.MasterState(phase="AWAIT_REPLY", pending_target=None)


def test_default_timeout_covers_round_trip():
    from icsim.modem import ModemConfig
    cfg = ModemConfig()
    timeout = nd.default_master_timeout_s(11, 11, cfg)
    airtime = (8 * 11 + 1) * cfg.cycles_per_bit / cfg.carrier_hz
    assert timeout == pytest.approx(2 * (2 * airtime + 7.8e-6))
