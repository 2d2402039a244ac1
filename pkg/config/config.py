"""
Configurações centralizadas do otimizador de circuitos ópticos com anúncio (heralding)
"""
import os
from pathlib import Path
from typing import Dict, Any
from dotenv import load_dotenv

# Carregar variáveis de ambiente
load_dotenv()

# Diretórios base
BASE_DIR = Path(__file__).parent.parent
PROBLEMS_DIR = BASE_DIR / "config" / "problems"
RESULTS_DIR = Path(os.getenv("HERALD_RESULTS_DIR", str(BASE_DIR / "results")))
LOGS_DIR = BASE_DIR / "logs"

# Criar diretórios se não existirem
for directory in [RESULTS_DIR, LOGS_DIR]:
    directory.mkdir(parents=True, exist_ok=True)

# Paralelismo (limite de workers do multistart)
HERALD_THREADS = int(os.getenv("HERALD_THREADS", str(os.cpu_count() or 1)))

# Memória disponível para comutadores pré-calculados do passo de Gauss-Newton
GN_MEMORY_BUDGET_MB = float(os.getenv("GN_MEMORY_BUDGET_MB", "256"))

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s | %(levelname)-7s | %(name)s | %(message)s"

# Application
APP_NAME = os.getenv("APP_NAME", "Herald Circuit Designer")
APP_VERSION = os.getenv("APP_VERSION", "1.0.0")
DEBUG = os.getenv("DEBUG", "False").lower() == "true"

# Testes lentos (reprodução completa dos benchmarks)
SLOW_TESTS = os.getenv("HERALD_SLOW_TESTS", "0") == "1"

# Tolerâncias numéricas compartilhadas
NUMERICAL_TOLERANCES: Dict[str, float] = {
    "scattering_unitarity": 1e-12,
    "fock_unitarity": 1e-10,
    "approximate_amplitude": 1e-10,
    "branch_cut": 1e-8,
    "frame_rank": 1e-10,
    "reunitarize_drift": 1e-10,
    "extraction_residual": 1e-8,
    "extraction_rank_one": 1e-6,
    "extraction_lift_match": 1e-6,
    "tangent_rank": 1e-8,
    "decomposition_unitarity": 1e-10,
}

# Configurações do otimizador SQP
SOLVER_DEFAULTS: Dict[str, Any] = {
    "eps_R": 1e-12,
    "eps_T": 1e-6,
    "eta_initial": 1.0,
    "eta_min": 1e-8,
    "max_outer_iters": 500,
    "cg_max_iters": None,  # None => 10 * N_st
    "cg_rtol_cap": 0.1,
    "cg_rtol_floor": 1e-4,
    "lanczos_rank_initial": 8,
    "lanczos_threshold": 256,  # blocos menores usam Cayley exato
    "lanczos_tolerance": 1e-8,
    "armijo_c1": 1e-4,
    "armijo_shrink": 0.5,
    "armijo_max_trials": 30,
    "tangent_max_residual": 1e-2,
    "trust_radius": 1.0,
    "stall_norm": 1e-12,
    "stall_iterations": 5,
    "seed": 42,
}

# Configurações do multistart
MULTISTART_DEFAULTS: Dict[str, Any] = {
    "runs": 100,
    "workers": HERALD_THREADS,
    "cluster_resolution": 1e-4,
}

# Configurações do baseline max P*F^p
BASELINE_DEFAULTS: Dict[str, Any] = {
    "p": 2.0,
    "max_iters": 2000,
    "gtol": 1e-7,
    "initial_step": 0.5,
    "armijo_c1": 1e-4,
    "armijo_shrink": 0.5,
    "armijo_max_trials": 40,
    "polish_threshold": 1e-3,  # 1 - F abaixo disso => Gauss-Newton em F
    "polish_tol": 1e-14,
    "polish_max_iters": 100,
    "seed": 42,
    "runs": 20,
}

# Curva analítica do ansatz de Bell em 6 modos
ANALYTIC_BELL_POINTS = 200
