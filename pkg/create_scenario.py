import json
import sys
from pathlib import Path

from core.registry import PRESET_PARAMETERS, preset_names
from pydantic_models import PresetParameters, ScenarioConfig


def create_scenario(preset: str, k: str, path: str):
    """
    Escribe un escenario inicial para `preset` con los parámetros por defecto.
    Se valida con el mismo esquema que usa `main.py run`.
    """
    if preset not in preset_names():
        print(f"Error: preset desconocido '{preset}'. Disponibles: {', '.join(preset_names())}")
        return False

    k_value = k if k.startswith("quantized") else float(k)
    defaults = PresetParameters().model_dump()
    data = {
        "name": Path(path).stem,
        "preset": preset,
        "parameters": {name: defaults[name] for name in PRESET_PARAMETERS[preset]},
        "k": k_value,
        "outputs": ["trajectory", "invariants"],
    }
    try:
        ScenarioConfig.model_validate(data)
    except ValueError as e:
        print(f"Error: el escenario no es válido: {e}")
        return False

    target = Path(path)
    if target.exists():
        print(f"Error: '{target}' ya existe.")
        return False
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    print(f"¡Escenario '{data['name']}' creado en {target}!")
    return True


if __name__ == "__main__":
    if len(sys.argv) != 4:
        print("Uso: python create_scenario.py <preset> <k | quantized(n)> <ruta.json>")
        sys.exit(1)

    preset_arg, k_arg, path_arg = sys.argv[1:4]
    try:
        ok = create_scenario(preset_arg, k_arg, path_arg)
    except ValueError:
        print(f"Error: k debe ser un número o 'quantized(n)', recibido '{k_arg}'")
        ok = False
    sys.exit(0 if ok else 1)
