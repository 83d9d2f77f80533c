import os
import sys

sys.path.insert(0, os.path.abspath('../..'))
extensions = [
    'sphinx_click',
]
project = 'gasstorage'
html_title = 'gasstorage'
html_theme = 'furo'
html_theme_options = {
    "globaltoc_maxdepth": 5,
    "globaltoc_collapse": True,
    "light_css_variables": {
        "color-brand-primary": "#1a5e88",
        "color-brand-content": "#1a5e88",
    },
    "dark_css_variables": {
        "color-brand-primary": "#8dc3eb",
        "color-brand-content": "#8dc3eb",
    },
}
