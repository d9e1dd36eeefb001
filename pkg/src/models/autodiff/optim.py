"""
ADAM Optimizasyonu
Yanlılık düzeltmeli standart ADAM güncellemesi, isimli parametreler üzerinde
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

import torch

from errors import NonFiniteError, ShapeError


@dataclass
class AdamState:
    """Parametre başına moment tamponları ve adım sayacı"""
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: Dict[str, torch.Tensor] = field(default_factory=dict)
    second_moment: Dict[str, torch.Tensor] = field(default_factory=dict)


@torch.no_grad()
def adam_step(
    params: Mapping[str, torch.Tensor],
    grads: Optional[Mapping[str, torch.Tensor]],
    state: AdamState,
) -> AdamState:
    """
    Tüm parametreleri bir ADAM adımı ile yerinde güncelle.

    Args:
        params: isim -> parametre tensörü
        grads: isim -> türev; None ise param.grad kullanılır
        state: Moment tamponları (ilk adımda sıfırla başlatılır)

    Returns:
        Güncellenmiş state (step_count 1 artar)
    """
    resolved: Dict[str, torch.Tensor] = {}
    for name, param in params.items():
        grad = param.grad if grads is None else grads.get(name)
        if grad is None:
            grad = torch.zeros_like(param)
        if grad.shape != param.shape:
            raise ShapeError(f"{name}: türev boyutu {tuple(grad.shape)} != parametre {tuple(param.shape)}")
        if not torch.isfinite(grad).all():
            raise NonFiniteError(f"{name}: sonlu olmayan türev")
        resolved[name] = grad

    state.step_count += 1
    t = state.step_count
    bias1 = 1.0 - state.beta1 ** t
    bias2 = 1.0 - state.beta2 ** t

    for name, param in params.items():
        grad = resolved[name]
        m = state.first_moment.setdefault(name, torch.zeros_like(param))
        v = state.second_moment.setdefault(name, torch.zeros_like(param))
        if m.shape != param.shape:
            raise ShapeError(f"{name}: moment boyutu {tuple(m.shape)} != parametre {tuple(param.shape)}")

        m.mul_(state.beta1).add_(grad, alpha=1.0 - state.beta1)
        v.mul_(state.beta2).addcmul_(grad, grad, value=1.0 - state.beta2)

        m_hat = m / bias1
        v_hat = v / bias2
        param.sub_(state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon))

    return state
