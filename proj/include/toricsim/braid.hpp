#pragma once

// Anyon braiding on the torus: a half sigma_y rotation splits the ground
// state into a superposition with and without an e-pair, a closed sigma_x
// string carries an m-particle around a loop, and a second half rotation
// converts the accumulated phase into the readout star expectation.

#include <string>
#include <vector>

#include "toricsim/lattice.hpp"
#include "toricsim/ops.hpp"

namespace toricsim {

struct BraidPlan {
    int e_site = 0;          // qubit rotated to create the e-pair superposition
    int m_site = 0;          // qubit where the m-pair is created
    std::vector<int> loop;   // ordered sigma_x steps that carry one m around
    int readout_cell = 0;    // star probed after the readout rotation
};

struct BraidOutcome {
    double before = 0.0;     // readout star expectation on the input state
    double after = 0.0;      // the same expectation after the full sequence
    bool encloses = false;   // whether the string wound around one e-particle
    Vec pre_readout_state;   // state after fusion, before the readout rotation
    Vec final_state;
};

struct BraidReport {
    double before = 0.0;
    double after = 0.0;      // enclosing-loop readout
    double control = 0.0;    // non-enclosing-loop readout
    double contrast = 0.0;   // after minus control
};

// canned plans on a given lattice, all sharing the same e-site and readout
// star: a minimal string around one e-particle, a string enclosing neither,
// the first string walked twice, and a bare create-and-fuse step
BraidPlan enclosing_plan(const LatticeSpec& lattice);
BraidPlan control_plan(const LatticeSpec& lattice);
BraidPlan doubled_plan(const LatticeSpec& lattice);
BraidPlan null_plan(const LatticeSpec& lattice);

// Run one braid sequence on a pure state.  The sigma_x steps, together
// with the creation at m_site, must form a closed string (both m-particles
// re-fuse) that is contractible, so its winding around the e-pair is
// well defined; an open or non-contractible string throws
// std::invalid_argument.  The readout cell must be one of the two stars
// touched by the e-pair.
BraidOutcome braid_anyons(const LatticeSpec& lattice, const Vec& state,
                          const BraidPlan& plan);

// enclosing and control runs side by side; the contrast between their
// readouts is the braiding signature, independent of sign conventions
BraidReport braid_report(const LatticeSpec& lattice, const Vec& state);

std::string braid_report_json(const BraidReport& report);

}  // namespace toricsim
