"""
Module de persistance des rapports
Sauvegarde des rapports de clôture et des sorties de programmes en JSON,
avec un fichier de métadonnées par rapport
"""

import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.utils.logger import get_logger
from src.utils.settings import load_config

logger = get_logger(__name__)


class ReportStore:
    """Classe pour la persistance des rapports JSON"""

    def __init__(self, reports_dir: Optional[str] = None, config_path: Optional[str] = None):
        config = load_config(config_path)
        self.reports_dir = Path(reports_dir or config.get('paths', {}).get('reports', 'reports'))
        self.reports_dir.mkdir(parents=True, exist_ok=True)
        logger.debug(f"ReportStore initialisé: {self.reports_dir}")

    def _report_path(self, name: str) -> Path:
        return self.reports_dir / f"{name}.json"

    def _metadata_path(self, name: str) -> Path:
        return self.reports_dir / f"{name}.meta.json"

    def save_report(self, name: str, report: Dict[str, Any], source: Optional[str] = None) -> Dict[str, Any]:
        """
        Sauvegarde un rapport

        Args:
            name: Nom du rapport (nom de fichier sans extension)
            report: Contenu JSON
            source: Fichier ou fixture d'origine

        Returns:
            Métadonnées de la sauvegarde
        """
        start_time = datetime.now()
        try:
            path = self._report_path(name)
            text = json.dumps(report, indent=2, ensure_ascii=False, sort_keys=True)
            path.write_text(text + "\n", encoding='utf-8')
            statistics = report.get('statistics', {}) if isinstance(report, dict) else {}
            metadata = {
                'report_name': name,
                'output_path': str(path),
                'source': source,
                'entry_count': len(report.get('entries', [])) if isinstance(report, dict) else 0,
                'statistics': statistics,
                'size_bytes': path.stat().st_size,
                'duration_seconds': round((datetime.now() - start_time).total_seconds(), 4),
                'saved_at': datetime.now().isoformat(),
            }
            self._metadata_path(name).write_text(json.dumps(metadata, indent=2, ensure_ascii=False),
                                                 encoding='utf-8')
            logger.info(f"Rapport '{name}' sauvegardé: {metadata['entry_count']} entrées")
            return metadata
        except Exception as e:
            logger.error(f"Erreur lors de la sauvegarde du rapport '{name}': {e}")
            raise

    def load_report(self, name: str) -> Optional[Dict[str, Any]]:
        path = self._report_path(name)
        if not path.exists():
            logger.warning(f"Rapport '{name}' non trouvé: {path}")
            return None
        try:
            return json.loads(path.read_text(encoding='utf-8'))
        except Exception as e:
            logger.error(f"Erreur lors de la lecture de '{name}': {e}")
            return None

    def list_reports(self) -> List[str]:
        """Noms des rapports disponibles"""
        return sorted(p.name[:-len(".json")] for p in self.reports_dir.glob("*.json")
                      if not p.name.endswith(".meta.json"))

    def get_report_info(self, name: str) -> Optional[Dict[str, Any]]:
        path = self._metadata_path(name)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding='utf-8'))
