"""Models shared by the test modules."""
from gaugekit import modelfile as M

SU2_U1 = """
model "su2xu1" {
  group U SU(2) coupling 0.65
  group V U(1) coupling 0.35
  fermion L rep bifundamental chirality left charge -1
  fermion R rep fundamental_V chirality right charge -2
  scalar h rep bifundamental charge 1
}
"""

SU3_SU2 = """
model "su3xsu2" {
  group U SU(3) coupling 0.9
  group V SU(2) coupling 0.6
  fermion Psi rep bifundamental
  fermion q rep fundamental_U chirality left
  scalar phi rep bifundamental
  scalar s rep fundamental_V
}
"""

SU2_SU2 = """
model "su2xsu2" {
  group U SU(2) coupling 0.8
  group V SU(2) coupling 0.55
  fermion Psi rep bifundamental
  scalar phi rep bifundamental
  scalar n rep singlet
}
"""

TEXTS = {"su2xu1": SU2_U1, "su3xsu2": SU3_SU2, "su2xsu2": SU2_SU2}


def model(name):
    return M.to_model_spec(M.parse_model_spec(TEXTS[name]))


def all_models():
    return [model(n) for n in TEXTS]
