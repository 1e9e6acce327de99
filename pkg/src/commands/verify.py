import logging

import click

from src.errors import VerificationError
from src.models.store import artifact_store
from src.theory import render_text, run_all_checks

# Configure logging
logger = logging.getLogger(__name__)


@click.command("verify")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trials", type=int, default=1000, show_default=True, help="Trials per check.")
@click.option("--n-jobs", type=int, default=None, help="Worker threads.")
@click.option("--output-dir", default=None, help="Directory for theorems.json and theorems.txt.")
def verify_command(seed, trials, n_jobs, output_dir):
    """
    Check the Micro-F1 bound, its attainment and accuracy = Micro-F1 on random data.
    """
    artifact_store.open(output_dir)
    results = run_all_checks(seed, trials, n_jobs)
    text = render_text(results)
    artifact_store.write_json(artifact_store.path("theorems.json"), results)
    artifact_store.write_text(artifact_store.path("theorems.txt"), text)
    click.echo(text, nl=False)

    failed = [r for r in results["theorems"] if not r["passed"]]
    if failed:
        raise VerificationError(
            f"{failed[0]['name']} failed on {failed[0]['violations']} trials",
            counterexample=failed[0]["counterexample"],
        )
    if not results["passed"]:
        raise VerificationError(
            f"unrealistic rule shows no Micro-F1 gap over the sign rule (gap {results['overestimation_gap']})",
            counterexample=results["overestimation"]["rows"][0],
        )
