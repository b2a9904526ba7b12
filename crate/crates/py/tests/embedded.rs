use pyo3::prelude::*;

use gswl::gswl;

const SCRIPT: &std::ffi::CStr = cr#"
import gswl

flat = gswl.Complex.grid(4, 4)
bent = flat.deform("twist", amplitude=0.2, seed=1)
assert flat.counts == [16, 33, 18]
assert gswl.equivalence_rounds(flat, bent, depth=3, mode="swl") == [True] * 4
assert gswl.equivalence_rounds(flat, bent, depth=1)[0] is False
assert gswl.Complex.from_json(bent.to_json()).vertices() == bent.vertices()

real = gswl.realize([flat, bent], depth=2, readout="ect", directions=4, thresholds=5)
assert real["hidden_dim"] == 3 * real["block"]
assert [len(m["readout"]) for m in real["members"]] == [20, 20]
assert all(m["matches_direct_ect"] for m in real["members"])

try:
    gswl.realize([flat], depth=1, readout="ect")
except ValueError as e:
    assert "depth" in str(e)
else:
    raise AssertionError("depth below dimension accepted")

try:
    gswl.Complex.load("/nonexistent/mesh.json")
except OSError:
    pass
else:
    raise AssertionError("missing file accepted")
"#;

#[test]
fn module_runs_inside_an_embedded_interpreter() {
    pyo3::append_to_inittab!(gswl);
    Python::initialize();
    Python::attach(|py| {
        if let Err(e) = py.run(SCRIPT, None, None) {
            e.display(py);
            panic!("embedded script failed");
        }
    });
}
