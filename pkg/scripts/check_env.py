"""Quick environment diagnostics: prints versions of the packages wristrecon imports.
Run: python scripts/check_env.py
"""
from importlib import import_module
from textwrap import indent

CORE_PACKAGES = [
    ("numpy", "__version__"),
    ("scipy", "__version__"),
    ("skimage", "__version__"),  # scikit-image
    ("pydantic", "__version__"),
    ("pydantic_settings", "__version__"),
    ("dotenv", None),  # python-dotenv has no __version__ on the package
    ("yaml", "__version__"),  # PyYAML
    ("click", "__version__"),
    ("joblib", "__version__"),
    ("tqdm", "__version__"),
    ("PIL", "__version__"),  # Pillow
    ("plyfile", None),
    ("pytest", "__version__"),
]


def get_version(mod_name: str, attr: str | None):
    try:
        m = import_module(mod_name)
    except Exception as e:  # noqa: BLE001
        return f"NOT INSTALLED ({e.__class__.__name__}: {e})"
    if attr and hasattr(m, attr):
        return getattr(m, attr)
    try:
        from importlib.metadata import version
        return version({"dotenv": "python-dotenv"}.get(mod_name, mod_name))
    except Exception:  # noqa: BLE001
        return "installed"


if __name__ == "__main__":
    import platform, sys
    print("Environment summary:\n")
    print(f"Python: {platform.python_version()} ({sys.executable})")
    rows = []
    for name, attr in CORE_PACKAGES:
        rows.append(f"{name:18} -> {get_version(name, attr)}")
    print(indent("\n".join(rows), prefix="  "))
    print("\nTip: keep versions aligned across requirements.* files to avoid resolution conflicts.")
