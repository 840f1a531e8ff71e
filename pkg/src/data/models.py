"""
Data models for run persistence
"""
from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass
class RunManifest:
    """Record of one CLI run, written next to its data files"""
    command: str
    config: dict[str, Any]
    tool_version: str
    seed: Optional[int]
    wall_time: float
    files: dict[str, str] = field(default_factory=dict)
    result: dict[str, Any] = field(default_factory=dict)
    rule_variant_id: Optional[str] = None
    particle_count: Optional[int] = None

    def to_dict(self) -> dict[str, Any]:
        """Flat record: result values sit next to the run fields, which win on a name clash"""
        payload = {
            **self.result,
            'command': self.command,
            'config': self.config,
            'tool_version': self.tool_version,
            'seed': self.seed,
            'wall_time': self.wall_time,
            'files': self.files,
        }
        if self.rule_variant_id is not None:
            payload['rule_variant_id'] = self.rule_variant_id
        if self.particle_count is not None:
            payload['particle_count'] = self.particle_count
        return payload

    def data_section(self) -> dict[str, Any]:
        """Everything except the wall time; equal across reruns"""
        payload = self.to_dict()
        payload.pop('wall_time')
        return payload
