#!/usr/bin/env python3
# Copyright 2026 The mmil Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Produces one artifact of every kind with the CLI and validates it."""

import argparse
import json
import os
import subprocess
import sys
import tempfile

import jsonschema

SOLVE_HEADER = "iter,payoff,sup_payoff,entropy,regret_avg"
ALGO_HEADER = "round,objective,exact_gap,sup_payoff"


def run(binary, *args):
  subprocess.run([binary, *args], check=True, stdout=subprocess.DEVNULL)


def main():
  parser = argparse.ArgumentParser()
  parser.add_argument("binary")
  parser.add_argument("schemas")
  opts = parser.parse_args()

  def schema(name):
    with open(os.path.join(opts.schemas, name + ".schema.json")) as f:
      return json.load(f)

  failures = 0
  with tempfile.TemporaryDirectory() as tmp:
    p = lambda name: os.path.join(tmp, name)
    run(opts.binary, "mdp", "build", "cliff", "--T", "6", "--out", p("b.json"),
        "--mdp-out", p("m.json"))
    run(opts.binary, "moments", "eval", "--game", "u3", "--mdp", "loop",
        "--out", p("mo.json"), "--class-out", p("cls.json"))
    run(opts.binary, "solve", "--game", "cliff", "--T", "6", "--payoff", "u2",
        "--mode", "dual", "--out", p("s.json"), "--trace", p("s.csv"))
    for algo in ("bc", "advil", "adril", "dagger", "daequil"):
      run(opts.binary, "algo", algo, "--mdp", p("m.json"), "--expert",
          p("b.json"), "--seed", "1", "--out", p(algo + ".json"),
          "--trace", p(algo + ".csv"), "--policy-out", p(algo + "_pi.json"))
    run(opts.binary, "bounds", "run", "--suite", "lb", "--out", p("r.json"))

    checks = [("b.json", "built_mdp"), ("m.json", "mdp"),
              ("mo.json", "moments_eval"), ("cls.json", "function_class"),
              ("s.json", "equilibrium_result"), ("r.json", "bound_reports")]
    for algo in ("bc", "advil", "adril", "dagger", "daequil"):
      checks += [(algo + ".json", "train_result"), (algo + "_pi.json", "policy")]
    for path, name in checks:
      with open(p(path)) as f:
        doc = json.load(f)
      try:
        jsonschema.validate(doc, schema(name))
        print(f"ok   {path} against {name}")
      except jsonschema.ValidationError as e:
        failures += 1
        print(f"FAIL {path} against {name}: {e.message}")
    # The solver config echoed in the result must itself be a valid config.
    with open(p("s.json")) as f:
      jsonschema.validate(json.load(f)["context"]["config"],
                          schema("solver_config"))
    for algo in ("bc", "advil", "adril", "dagger", "daequil"):
      with open(p(algo + ".json")) as f:
        jsonschema.validate(json.load(f)["context"]["config"],
                            schema(algo + "_config"))
    configs = os.path.join(os.path.dirname(opts.schemas), "configs")
    for name in sorted(os.listdir(configs)):
      kind = "solver" if name.startswith("solve") else name.split("_")[0]
      kind = kind.removesuffix(".json")
      with open(os.path.join(configs, name)) as f:
        try:
          jsonschema.validate(json.load(f), schema(kind + "_config"))
          print(f"ok   configs/{name} against {kind}_config")
        except jsonschema.ValidationError as e:
          failures += 1
          print(f"FAIL configs/{name}: {e.message}")
    for path, header in [("s.csv", SOLVE_HEADER)] + [
        (a + ".csv", ALGO_HEADER)
        for a in ("bc", "advil", "adril", "dagger", "daequil")]:
      with open(p(path)) as f:
        first = f.readline().strip()
      if first != header:
        failures += 1
        print(f"FAIL {path}: header {first!r}")
  return 1 if failures else 0


if __name__ == "__main__":
  sys.exit(main())
