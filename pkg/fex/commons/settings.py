# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import os

from dotenv import dotenv_values, find_dotenv # pip install -U python-dotenv

def _load_environment() -> dict:
	"""Values from a .env file, overlaid by FEX_* process environment variables"""
	values = dict(dotenv_values(find_dotenv(usecwd=True)))
	values.update({
		k: v for k, v in os.environ.items() if k.startswith("FEX_")
	})
	return values

class Settings:
	VERSION = "0.3.0"
	PROGNAME = "fex"

	DOTENV = _load_environment()

	try:
		LOGLEVEL = DOTENV["FEX_LOGLEVEL"].upper()
	except KeyError:
		LOGLEVEL = DOTENV["FEX_LOGLEVEL"] = "INFO"

	try:
		THREADS = max(1, int(DOTENV["FEX_THREADS"]))
	except (KeyError, ValueError):
		THREADS = os.cpu_count() or 1
		DOTENV["FEX_THREADS"] = str(THREADS)

	try:
		SEED = int(DOTENV["FEX_SEED"])
	except (KeyError, ValueError):
		SEED = 0
		DOTENV["FEX_SEED"] = "0"

	try:
		MAX_ORACLE_FEATURES = int(DOTENV["FEX_MAX_ORACLE_FEATURES"])
	except (KeyError, ValueError):
		MAX_ORACLE_FEATURES = 20
		DOTENV["FEX_MAX_ORACLE_FEATURES"] = "20"

	try:
		BRIDGE_TIMEOUT = float(DOTENV["FEX_BRIDGE_TIMEOUT"])
	except (KeyError, ValueError):
		BRIDGE_TIMEOUT = 10.0
		DOTENV["FEX_BRIDGE_TIMEOUT"] = "10.0"

	try:
		PRINTRESULT = (DOTENV["FEX_PRINTRESULT"].lower() == "true")
	except KeyError:
		PRINTRESULT = False
		DOTENV["FEX_PRINTRESULT"] = "false"

	try:
		OUTDIR = DOTENV["FEX_OUTDIR"]
	except KeyError:
		OUTDIR = DOTENV["FEX_OUTDIR"] = "."
