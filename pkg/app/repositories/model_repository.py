"""
Model Repository
Zip container holding a JSON manifest and float64 .npy sections
"""
import io
import json
import zipfile
from typing import Dict

import numpy as np

from app.exceptions import DataError
from app.ml.config import VERSION
from app.models.geometry import FeatureField, MultiObjectReference, ReferenceObject, TetMesh, TriMesh
from app.models.gpm import DmfcGpm
from app.repositories.base_repository import BaseRepository

MANIFEST = 'manifest.json'
FIXED_TIMESTAMP = (1980, 1, 1, 0, 0, 0)


def _npy_bytes(array: np.ndarray) -> bytes:
    buffer = io.BytesIO()
    np.save(buffer, np.ascontiguousarray(array), allow_pickle=False)
    return buffer.getvalue()


class ModelRepository(BaseRepository):
    """Repository for saved models"""

    def sections(self, model: DmfcGpm) -> Dict[str, np.ndarray]:
        arrays = {
            'mean.npy': model.mean.to_vector(),
            'eigenvalues.npy': model.eigenvalues,
            'basis.npy': model.basis,
        }
        for j, obj in enumerate(model.reference.objects):
            prefix = f'objects/{j}/'
            arrays[prefix + 'vertices.npy'] = obj.volume.vertices
            arrays[prefix + 'tets.npy'] = obj.volume.tets
            arrays[prefix + 'intensity.npy'] = obj.volume.intensity
            arrays[prefix + 'triangles.npy'] = obj.surface.triangles
            arrays[prefix + 'surface_index.npy'] = obj.surface_index
        return arrays

    def manifest(self, model: DmfcGpm) -> Dict:
        return {
            **model.to_dict(),
            'version': VERSION,
            'landmarks': [list(o.landmarks) for o in model.reference.objects],
            'metadata': model.metadata,
        }

    def save(self, path: str, model: DmfcGpm) -> str:
        """Write the container atomically; identical models give identical bytes"""
        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, 'w', compression=zipfile.ZIP_DEFLATED) as archive:
            entries = {MANIFEST: json.dumps(self.manifest(model), indent=2, sort_keys=True).encode('utf-8')}
            entries.update({name: _npy_bytes(a) for name, a in self.sections(model).items()})
            for name, data in entries.items():
                info = zipfile.ZipInfo(name, date_time=FIXED_TIMESTAMP)
                info.compress_type = zipfile.ZIP_DEFLATED
                archive.writestr(info, data)
        return self.write_bytes(path, buffer.getvalue())

    def load(self, path: str) -> DmfcGpm:
        data = self.read_bytes(path)
        try:
            with zipfile.ZipFile(io.BytesIO(data)) as archive:
                manifest = json.loads(archive.read(MANIFEST).decode('utf-8'))

                def array(name):
                    return np.load(io.BytesIO(archive.read(name)), allow_pickle=False)

                objects = []
                for j, name in enumerate(manifest['objects']):
                    prefix = f'objects/{j}/'
                    volume = TetMesh(array(prefix + 'vertices.npy'), array(prefix + 'tets.npy'),
                                     array(prefix + 'intensity.npy'))
                    surface_index = array(prefix + 'surface_index.npy')
                    surface = TriMesh(volume.vertices[surface_index], array(prefix + 'triangles.npy'))
                    objects.append(ReferenceObject(name, surface, volume, surface_index,
                                                   manifest['landmarks'][j]))
                reference = MultiObjectReference(tuple(objects))
                if reference.sizes != manifest['domain_sizes']:
                    raise DataError('Model manifest domain sizes do not match the stored meshes')
                return DmfcGpm(
                    reference=reference,
                    mean=FeatureField.from_vector(reference, array('mean.npy')),
                    eigenvalues=array('eigenvalues.npy'),
                    basis=array('basis.npy'),
                    class_weights=tuple(manifest['class_weights']),
                    pose_mode=manifest['pose_mode'],
                    metadata=manifest.get('metadata', {}),
                )
        except (zipfile.BadZipFile, KeyError, json.JSONDecodeError, ValueError) as e:
            if isinstance(e, DataError):
                raise
            raise DataError(f'Corrupt model file {self.path(path)}: {e}') from None
