"""
Mesh Repository
ASCII PLY meshes (surface faces and tetrahedra over one vertex list) and raw volumes
"""
import io
import os
from typing import Dict, Optional, Tuple

import numpy as np

from app.exceptions import DataError
from app.ml.config import VERSION
from app.models.geometry import MultiObjectReference, TetMesh, TriMesh, Volume3
from app.models.gpm import JointInstance
from app.repositories.base_repository import BaseRepository

ELEMENT_SIZES = {'face': 3, 'tet': 4}


def _fmt(value: float) -> str:
    return repr(float(value))


class MeshRepository(BaseRepository):
    """Repository for mesh and volume files"""

    def save_ply(self, path: str, vertices: np.ndarray, faces: Optional[np.ndarray] = None,
                 tets: Optional[np.ndarray] = None, intensity: Optional[np.ndarray] = None) -> str:
        """Write vertices (optionally with intensity), triangle faces and tetrahedra"""
        faces = np.zeros((0, 3), dtype=np.int64) if faces is None else np.asarray(faces)
        header = ['ply', 'format ascii 1.0', f'comment dmfc {VERSION}', f'element vertex {len(vertices)}',
                  'property double x', 'property double y', 'property double z']
        if intensity is not None:
            header.append('property double intensity')
        header += [f'element face {len(faces)}', 'property list uchar int vertex_indices']
        if tets is not None:
            header += [f'element tet {len(tets)}', 'property list uchar int vertex_indices']
        header.append('end_header')

        lines = header
        columns = [vertices[:, 0], vertices[:, 1], vertices[:, 2]]
        if intensity is not None:
            columns.append(intensity)
        lines += [' '.join(_fmt(v) for v in row) for row in zip(*columns)]
        lines += ['3 ' + ' '.join(str(int(i)) for i in f) for f in faces]
        if tets is not None:
            lines += ['4 ' + ' '.join(str(int(i)) for i in t) for t in tets]
        return self.write_text(path, '\n'.join(lines) + '\n')

    def load_ply(self, path: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray, Optional[np.ndarray]]:
        """(vertices, faces, tets, intensity or None)"""
        lines = self.read_text(path).splitlines()
        if not lines or lines[0].strip() != 'ply':
            raise DataError(f'Not a PLY file: {self.path(path)}')
        try:
            end = lines.index('end_header')
        except ValueError:
            raise DataError(f'PLY header is not terminated: {self.path(path)}') from None

        elements, properties = [], {}
        for line in lines[1:end]:
            parts = line.split()
            if parts[0] == 'element':
                elements.append((parts[1], int(parts[2])))
                properties[parts[1]] = []
            elif parts[0] == 'property':
                properties[elements[-1][0]].append(parts[-1])

        cursor = end + 1
        vertices = np.zeros((0, 3))
        intensity = None
        blocks = {'face': np.zeros((0, 3), dtype=np.int64), 'tet': np.zeros((0, 4), dtype=np.int64)}
        try:
            for name, count in elements:
                rows = lines[cursor:cursor + count]
                if len(rows) != count:
                    raise DataError(f'PLY file is truncated: {self.path(path)}')
                cursor += count
                if name == 'vertex':
                    table = np.array([[float(v) for v in row.split()] for row in rows]).reshape(count, -1)
                    vertices = table[:, :3]
                    if 'intensity' in properties['vertex']:
                        intensity = table[:, properties['vertex'].index('intensity')]
                elif name in ELEMENT_SIZES:
                    size = ELEMENT_SIZES[name]
                    table = np.array([[int(v) for v in row.split()] for row in rows], dtype=np.int64)
                    table = table.reshape(count, -1)
                    if count and np.any(table[:, 0] != size):
                        raise DataError(f'{name} rows must list {size} vertices')
                    blocks[name] = table[:, 1:].reshape(count, size)
        except ValueError as e:
            raise DataError(f'Corrupt PLY body in {self.path(path)}: {e}') from None
        return vertices, blocks['face'], blocks['tet'], intensity

    def save_object(self, path: str, surface: TriMesh, volume: TetMesh, surface_index: np.ndarray) -> str:
        """One object: tet vertices with intensity, faces indexed into the tet vertices"""
        faces = np.asarray(surface_index)[surface.triangles]
        return self.save_ply(path, volume.vertices, faces, volume.tets, volume.intensity)

    def load_object(self, path: str) -> Tuple[TriMesh, TetMesh, np.ndarray]:
        """(surface, volume, surface_index); surface vertices are the ids used by faces, ascending"""
        vertices, faces, tets, intensity = self.load_ply(path)
        volume = TetMesh(vertices, tets, intensity)
        surface_index = np.unique(faces)
        triangles = np.searchsorted(surface_index, faces)
        return TriMesh(vertices[surface_index], triangles), volume, surface_index

    def save_surface(self, path: str, surface: TriMesh) -> str:
        return self.save_ply(path, surface.vertices, surface.triangles)

    def load_surface(self, path: str) -> TriMesh:
        vertices, faces, _, _ = self.load_ply(path)
        return TriMesh(vertices, faces)

    def save_volume(self, path: str, volume: Volume3) -> str:
        """Raw little-endian float64 voxels plus a JSON header next to them"""
        stem = path[:-4] if path.endswith('.raw') else path
        self.write_bytes(stem + '.raw', volume.voxels.astype('<f8').tobytes())
        self.write_json(stem + '.json', {**volume.header(), 'dtype': '<f8', 'order': 'x-fastest',
                                         'version': VERSION})
        return stem + '.raw'

    def load_volume(self, path: str) -> Volume3:
        stem = path[:-4] if path.endswith(('.raw', '.json')) else path
        header = self.read_json(stem + '.json')
        try:
            dims, spacing, origin = header['dims'], header['spacing'], header['origin']
        except KeyError as e:
            raise DataError(f'Volume header lacks {e}') from None
        data = self.read_bytes(stem + '.raw')
        if len(data) % 8:
            raise DataError(f'Raw volume {self.path(stem)}.raw is truncated')
        voxels = np.frombuffer(data, dtype='<f8')
        return Volume3(dims, spacing, origin, voxels.astype(np.float64))

    def save_image(self, path: str, image: np.ndarray) -> str:
        """2D float64 image as .npy"""
        buffer = io.BytesIO()
        np.save(buffer, np.ascontiguousarray(image, dtype=np.float64), allow_pickle=False)
        return self.write_bytes(path, buffer.getvalue())

    def save_instance(self, directory: str, instance: JointInstance, reference: MultiObjectReference) -> Dict:
        """Posed surface and tet mesh of every object plus an instance record"""
        files = {}
        for obj, ref_obj in zip(instance.objects, reference.objects):
            files[obj.name] = {
                'volume': self.save_object(os.path.join(directory, f'{obj.name}.ply'), obj.surface,
                                           obj.volume, ref_obj.surface_index),
                'surface': self.save_surface(os.path.join(directory, f'{obj.name}_surface.ply'), obj.surface),
            }
        self.write_json(os.path.join(directory, 'instance.json'), {**instance.to_dict(), 'version': VERSION})
        return files
