import logging

from src.main import create_cli

# Configure logging
logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
logger = logging.getLogger(__name__)

# Create the application
cli = create_cli()

if __name__ == "__main__":
    cli(prog_name="mlc")
