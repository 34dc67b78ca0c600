#pragma once

#include <deque>
#include <stdexcept>
#include <string>

// Replays fixed uniforms and normals so a test can force a kernel down a
// chosen path. Running out of either is a test bug.
struct ScriptedRng {
  std::deque<double> uniforms;
  std::deque<double> normals;

  double uniform() { return pop(uniforms, "uniform"); }
  double normal() { return pop(normals, "normal"); }

 private:
  static double pop(std::deque<double>& q, const char* what) {
    if (q.empty()) throw std::logic_error(std::string("ScriptedRng: out of ") + what + " draws");
    const double v = q.front();
    q.pop_front();
    return v;
  }
};
