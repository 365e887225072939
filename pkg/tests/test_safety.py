import pytest

from prepair.core import Configuration, OrderKind
from prepair.mc import model_check
from prepair.oracle import bounded_pred, box_configs, config_successors, explicit_reach, in_upset
from prepair.safety import SINK, AutTransition, SafetyAutomaton, format_product_config, parse_obs, product
from prepair.semantics import ValidationError


class TestObservations:
    def obs(self, text, k=1):
        return parse_obs(text, ["nw", "w"], ["nr", "r"], k)

    def test_atoms_and_connectives(self):
        p = self.obs("w & nr_1")
        assert p("w", ("nr",)) and not p("nw", ("nr",)) and not p("w", ("r",))
        q = self.obs("!(w & nr_1) | false")
        assert q("nw", ("nr",)) and not q("w", ("nr",))
        assert self.obs("true")("w", ("r",))

    def test_precedence_and_binds_tighter(self):
        p = self.obs("nw | w & r_1")
        assert p("nw", ("nr",)) and not p("w", ("nr",))

    @pytest.mark.parametrize("bad", ["w &", "(w", "w )", "nr_2", "zz", "w # r_1"])
    def test_rejects(self, bad):
        with pytest.raises(ValidationError):
            self.obs(bad)


def test_automaton_validation():
    t = (AutTransition("q0", "true", "q1"),)
    with pytest.raises(ValidationError):
        SafetyAutomaton(("q0",), "q0", ("q0",), t).validate()
    with pytest.raises(ValidationError):
        SafetyAutomaton((SINK,), SINK, (), ()).validate()
    with pytest.raises(ValidationError):
        SafetyAutomaton(("q0",), "q1", (), ()).validate()


class TestProduct:
    @pytest.fixture
    def model(self, corpus):
        return corpus("reader_writer_automaton").model()

    def test_unmatched_observation_goes_to_sink(self, corpus):
        doc = corpus("reader_writer_automaton")
        comp = doc.automaton.compile(doc.system, 1)
        assert comp.step("q1", "w", ("nr",)) == ["q1"]
        assert comp.step("q1", "w", ("r",)) == ["q2"]
        # q1 has no move for (nw, r_1) besides the nw one; (w, ...) is covered above
        assert comp.step(SINK, "nw", ("nr",)) == [SINK]

    def test_error_basis_is_accepting(self, model):
        msys, err = model
        assert err.order is OrderKind.PRODUCT
        assert {c.extra[0] for c in err.basis} == {"q2"}
        assert all(sum(c.counts) == 0 for c in err.basis)

    def test_explicit_process_excluded_from_counters(self, model):
        msys, _ = model
        (init,) = msys.initial_configs(2)
        assert init.counts == (2, 0) and init.extra == ("q0", "nr")

    def test_formatting(self, model):
        msys, _ = model
        c = Configuration("w", (0, 0), ("q1", "r"))
        assert format_product_config(c, msys) == "((w,r_1,(0,0)),q1)"

    def test_steps_match_oracle(self, model):
        msys, _ = model
        for c in box_configs(msys, 2):
            assert {s.target for s in msys.steps(c)} == config_successors(msys, c)

    def test_pred_candidates_match_oracle(self, model):
        from prepair.mc import pred_basis

        msys, err = model
        basis = pred_basis(err, msys)
        assert {c for c in box_configs(msys, 3) if in_upset(basis, c)} == bounded_pred(err, 3, msys)

    def test_check_agrees_with_explicit_search(self, model):
        msys, err = model
        safe, _ = model_check(msys, err)
        assert not safe
        assert explicit_reach(msys, 0, err)

    def test_broadcast_rejected_by_frontend(self, corpus):
        from prepair.frontend import InputError, emit_document, parse_document

        data = emit_document(corpus("mesi"))
        data.pop("errors")
        data["automaton"] = {"states": ["q0"], "init": "q0", "accepting": [], "transitions": []}
        with pytest.raises(InputError, match="automaton"):
            parse_document(data)
