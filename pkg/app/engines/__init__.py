from typing import Dict, List, Type

from app.core.errors import UnknownDetector
from app.engines.base_engine import BaseEngine
from app.engines.hb_engine import HbEngine
from app.engines.wcp_engine import WcpEngine


# Registry of available detectors
AVAILABLE_ENGINES: Dict[str, Type[BaseEngine]] = {
    "wcp": WcpEngine,
    "hb": HbEngine,
}


def get_engine(name: str, **kwargs) -> BaseEngine:
    """Fresh engine instance by detector name (engines are stateful, never shared)"""
    if name not in AVAILABLE_ENGINES:
        raise UnknownDetector(f"Detector '{name}' not found")
    return AVAILABLE_ENGINES[name](**kwargs)


def detector_names(selector: str) -> List[str]:
    """Expand a CLI selector (`wcp`, `hb` or `both`) into detector names"""
    if selector == "both":
        return list(AVAILABLE_ENGINES)
    if selector not in AVAILABLE_ENGINES:
        raise UnknownDetector(f"Detector '{selector}' not found")
    return [selector]
