"""
Checkpoints des vérifications de clôture

Une vérification longue (paires élément × sonde) peut être interrompue puis
reprise : les entrées terminées sont sauvegardées dans un fichier JSON par job.
"""

import json
from datetime import datetime
from pathlib import Path
from typing import Dict, Any, List, Optional

from src.utils.logger import get_logger

logger = get_logger(__name__)

SUFFIX = ".checkpoint.json"
METADATA_KEY = '_checkpoint_metadata'


class CheckpointManager:
    """Un fichier `<job>.checkpoint.json` par vérification"""

    def __init__(self, checkpoint_dir: str = "checkpoints"):
        self.checkpoint_dir = Path(checkpoint_dir)
        self.checkpoint_dir.mkdir(exist_ok=True, parents=True)
        logger.debug(f"Checkpoints dans {self.checkpoint_dir}")

    def _path(self, job_name: str) -> Path:
        return self.checkpoint_dir / f"{job_name}{SUFFIX}"

    def save_checkpoint(self, job_name: str, state: Dict[str, Any]) -> None:
        """
        Écrit l'état d'un job, avec horodatage

        L'écriture passe par un fichier temporaire : un checkpoint lu est
        toujours complet, même après une interruption pendant la sauvegarde.
        """
        path = self._path(job_name)
        payload = {**state, METADATA_KEY: {'saved_at': datetime.now().isoformat(), 'job_name': job_name}}
        partial = path.with_suffix(".tmp")
        try:
            partial.write_text(json.dumps(payload, indent=2, default=str), encoding='utf-8')
            partial.replace(path)
        except OSError as e:
            logger.error(f"Checkpoint {job_name} non sauvegardé: {e}")
            raise
        logger.debug(f"Checkpoint sauvegardé: {path}")

    def load_checkpoint(self, job_name: str) -> Optional[Dict[str, Any]]:
        """État sauvegardé, ou None (absent ou illisible)"""
        path = self._path(job_name)
        if not path.exists():
            return None
        try:
            state = json.loads(path.read_text(encoding='utf-8'))
        except (OSError, ValueError) as e:
            logger.warning(f"Checkpoint {job_name} illisible, ignoré: {e}")
            return None
        saved_at = state.get(METADATA_KEY, {}).get('saved_at', 'inconnu')
        logger.info(f"Checkpoint chargé pour {job_name} (sauvegardé le {saved_at})")
        return state

    def clear_checkpoint(self, job_name: str) -> None:
        path = self._path(job_name)
        try:
            path.unlink(missing_ok=True)
        except OSError as e:
            logger.error(f"Checkpoint {job_name} non supprimé: {e}")

    def list_checkpoints(self) -> List[str]:
        return sorted(file.name[:-len(SUFFIX)] for file in self.checkpoint_dir.glob(f"*{SUFFIX}"))


class ProgressTracker:
    """
    Suivi de progression d'une vérification (paires élément × sonde).

    Les entrées terminées sont conservées dans `completed` ; avec un
    CheckpointManager, elles sont sauvegardées à intervalle régulier et
    rechargées au redémarrage.
    """

    STATUSES = ('witnessed', 'failed', 'budget')

    def __init__(self, job_name: str, total: int, checkpoint_interval: int = 50,
                 checkpoint_manager: Optional[CheckpointManager] = None):
        self.job_name = job_name
        self.total = total
        self.checkpoint_interval = max(1, checkpoint_interval)
        self.checkpoint_manager = checkpoint_manager
        self.completed: Dict[str, Dict[str, Any]] = {}
        self.counts = {status: 0 for status in self.STATUSES}
        self.start_time = datetime.now()

        state = checkpoint_manager.load_checkpoint(job_name) if checkpoint_manager else None
        if state and state.get('total') == total:
            self.completed = dict(state.get('completed', {}))
            for entry in self.completed.values():
                self.counts[entry['status']] += 1
            logger.info(f"Reprise depuis checkpoint: {len(self.completed)}/{self.total}")

    @property
    def current(self) -> int:
        return len(self.completed)

    def is_done(self, key: str) -> bool:
        return key in self.completed

    def update(self, key: str, entry: Dict[str, Any]) -> None:
        """
        Enregistre une entrée terminée

        Args:
            key: Identifiant stable de la paire (élément, sonde)
            entry: Entrée de rapport, avec un champ 'status'
        """
        if key in self.completed:
            return
        self.completed[key] = entry
        self.counts[entry['status']] += 1

        if self.current % self.checkpoint_interval == 0:
            self._save_state()
            logger.info(f"Progression: {self.current}/{self.total} ({self.get_progress_percentage():.1f}%)")

    def _save_state(self) -> None:
        if self.checkpoint_manager is None:
            return
        self.checkpoint_manager.save_checkpoint(self.job_name, {
            'total': self.total,
            'completed': self.completed,
            'start_time': self.start_time.isoformat(),
        })

    def complete(self) -> None:
        """Marque la tâche comme complète et nettoie le checkpoint"""
        duration = (datetime.now() - self.start_time).total_seconds()
        logger.info(f"Tâche {self.job_name} terminée: {self.counts['witnessed']} témoins, "
                    f"{self.counts['failed']} échecs, {self.counts['budget']} budgets épuisés en {duration:.2f}s")
        if self.checkpoint_manager is not None:
            self.checkpoint_manager.clear_checkpoint(self.job_name)

    def get_progress_percentage(self) -> float:
        if self.total == 0:
            return 100.0
        return (self.current / self.total) * 100

    def get_summary(self, include_timing: bool = True) -> Dict[str, Any]:
        """Résumé de la progression (sans durée pour une sortie déterministe)"""
        summary: Dict[str, Any] = {
            'total': self.total,
            'processed': self.current,
            **self.counts,
            'progress_percentage': round(self.get_progress_percentage(), 2),
        }
        if include_timing:
            duration = (datetime.now() - self.start_time).total_seconds()
            summary['duration_seconds'] = duration
            summary['probes_per_second'] = self.current / duration if duration > 0 else 0
        return summary
