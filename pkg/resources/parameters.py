import enum
import logging
import os
import configparser
from rich.logging import RichHandler
FORMAT = "%(message)s"
logging.basicConfig(
    level="INFO", format=FORMAT, datefmt="[%X]", handlers=[RichHandler()]
)

class Methods(enum.Enum):
    CLASSIC = "classic"
    ADJUSTED = "adjusted"

log = logging.getLogger("rich")

CONFIG_FILE_NAME = "config.ini"

# NOT TO CHANGE
QUANTITIES = ("mean_x1", "mean_x2", "var_x1", "cov_x1x2", "var_x2")
CSV_FLOAT_FORMAT = "%.17g"


default_parameters = dict()
default_parameters['Solver'] = {
    'step': 1e-3,
    'grid_spacing': 0.05
}
default_parameters['Closure'] = {
    'sigma_floor': 1e-6
}
default_parameters['Simulation'] = {
    'reps': 5000,
    'seed': 1,
    'max_workers': 4,
    'chunk_size': 250
}
default_parameters['Comparison'] = {
    'report_start': 6,
    'report_end': 15,
    'eps_rel': 1.0,
    'initial_fraction': 0.8,
    'linger_band': 0.5
}
default_parameters['Output'] = {
    'out_dir': os.environ.get("QCLOSE_OUT", "output")
}

def create_config():
    default_config = configparser.ConfigParser()

    for section in default_parameters.keys():
        default_config.add_section(section)
        for option in default_parameters[section].keys():
            default_config[section][option] = str(default_parameters[section][option])
    # Write the configuration to a file
    with open(CONFIG_FILE_NAME, 'w') as configfile:
        default_config.write(configfile)

def read_config():
    if not os.path.exists(CONFIG_FILE_NAME):
        create_config()

    config = configparser.ConfigParser()
    config.read(CONFIG_FILE_NAME)

    config_values=dict()
    for section in default_parameters.keys():
        for option in default_parameters[section].keys():
            if isinstance(default_parameters[section][option], float):
                config_values[option] = config.getfloat(section, option, fallback=default_parameters[section][option])
            elif isinstance(default_parameters[section][option], bool):
                config_values[option] = config.getboolean(section, option, fallback=default_parameters[section][option])
            elif isinstance(default_parameters[section][option], int):
                config_values[option] = config.getint(section, option, fallback=default_parameters[section][option])
            else:
                config_values[option] = config.get(section, option, fallback=default_parameters[section][option])

    # the environment wins over the file so that scripted runs can redirect output
    if os.environ.get("QCLOSE_OUT"):
        config_values['out_dir'] = os.environ["QCLOSE_OUT"]

    if config_values['step'] <= 0:
        log.warning(f"Solver step must be positive, got {config_values['step']}, using the default")
        config_values['step'] = default_parameters['Solver']['step']
    if config_values['reps'] < 2:
        log.warning("At least two replications are needed for a sample covariance, using 2")
        config_values['reps'] = 2

    return config_values

PARAMETERS = read_config()
